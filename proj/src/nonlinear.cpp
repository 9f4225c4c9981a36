#include "fracneu/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fracneu/format.hpp"
#include "fracneu/isotonic.hpp"
#include "fracneu/kernel.hpp"
#include "fracneu/quadrature.hpp"

namespace fracneu {

double g_trunc(const ProblemParams& params, double t) {
    if (t < 0.0) return 2.0 * t;  // derivative of the quadratic penalty t^2
    if (!(t <= params.t0)) {
        double q = params.q, l = params.ell, t0 = params.t0;
        return std::pow(t0, q - 1.0) +
               (q - 1.0) / (l - 1.0) * std::pow(t0, q - l) *
                   (std::pow(t, l - 1.0) - std::pow(t0, l - 1.0));
    }
    return std::pow(t, params.q - 1.0);
}

double g_trunc_prime(const ProblemParams& params, double t) {
    if (t < 0.0) return 2.0;
    if (!(t <= params.t0))
        return (params.q - 1.0) * std::pow(params.t0, params.q - params.ell) *
               std::pow(t, params.ell - 2.0);
    return (params.q - 1.0) * std::pow(t, params.q - 2.0);
}

double G_antiderivative(const ProblemParams& params, double t) {
    if (t < 0.0) return t * t;
    double q = params.q;
    if (!(t <= params.t0)) {
        double l = params.ell, t0 = params.t0;
        double G0 = std::pow(t0, q) / q;
        double lin = std::pow(t0, q - 1.0) * (t - t0);
        double c = (q - 1.0) / (l - 1.0) * std::pow(t0, q - l);
        double tail = c * ((std::pow(t, l) - std::pow(t0, l)) / l -
                           std::pow(t0, l - 1.0) * (t - t0));
        return G0 + lin + tail;
    }
    return std::pow(t, q) / q;
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::zero: return "zero";
        case Classification::one: return "one";
        default: return "nonconstant";
    }
}

double energy(const EnergyModel& model, const DiscreteFunction& u) {
    const BilinearForms& forms = *model.forms;
    if (u.size() != forms.n_total())
        throw std::invalid_argument("energy: profile on a different mesh");
    Eigen::Map<const Eigen::VectorXd> v(u.values().data(), u.size());
    double quad = 0.5 * model.params.d * seminorm_sq(forms, u) + 0.5 * v.dot(forms.mass * v);
    double nonlin = interior_integral(
        forms, [&](double r) { return G_antiderivative(model.params, u.value_at(r)); });
    return quad - nonlin;
}

Eigen::VectorXd energy_gradient(const EnergyModel& model, const DiscreteFunction& u) {
    return weak_residual(*model.forms, model.params, u);
}

DiscreteFunction cone_project(const BilinearForms& forms, const DiscreteFunction& u) {
    const std::size_t nI = forms.n_interior();
    std::vector<double> y(u.values().begin(), u.values().begin() + nI);
    std::vector<double> w(forms.lumped_mass.data(), forms.lumped_mass.data() + nI);
    std::vector<double> fit = isotonic_nondecreasing(y, w, 0.0);
    DiscreteFunction out(u.mesh_ptr(), 0.0);
    std::copy(fit.begin(), fit.end(), out.values().begin());
    forms.slave_exterior(out);
    return out;
}

double classification_distance(const BilinearForms& forms, const DiscreteFunction& u,
                               double constant) {
    const std::size_t nI = forms.n_interior();
    Eigen::VectorXd d = forms.interior(u).array() - constant;
    return std::sqrt(d.dot(forms.mass.topLeftCorner(nI, nI) * d));
}

Classification classify(const BilinearForms& forms, const DiscreteFunction& u, double tol) {
    if (classification_distance(forms, u, 0.0) <= tol) return Classification::zero;
    if (classification_distance(forms, u, 1.0) <= tol) return Classification::one;
    return Classification::nonconstant;
}

namespace {

struct CondensedModel {
    const EnergyModel* model;
    const BilinearForms* forms;
    std::size_t nI;
    Eigen::MatrixXd MI;
    Eigen::VectorXd w;  // interior lumped mass

    explicit CondensedModel(const EnergyModel& m)
        : model(&m), forms(m.forms), nI(m.forms->n_interior()) {
        MI = forms->mass.topLeftCorner(nI, nI);
        w = forms->lumped_mass.head(nI);
    }
    DiscreteFunction lift(const Eigen::VectorXd& uI) const { return forms->from_interior(uI); }
    double E(const Eigen::VectorXd& uI) const { return energy(*model, lift(uI)); }
    Eigen::VectorXd grad(const Eigen::VectorXd& uI) const {
        DiscreteFunction u = lift(uI);
        Eigen::VectorXd load = load_vector(
            *forms, [&](double r) { return g_trunc(model->params, u.value_at(r)); });
        return model->params.d * (forms->condensed_stiffness() * uI) + MI * uI - load.head(nI);
    }
    Eigen::VectorXd project(Eigen::VectorXd uI) const {
        std::vector<double> y(uI.data(), uI.data() + nI);
        std::vector<double> ww(w.data(), w.data() + nI);
        std::vector<double> fit = isotonic_nondecreasing(y, ww, 0.0);
        return Eigen::Map<Eigen::VectorXd>(fit.data(), nI);
    }
    double pg_norm(const Eigen::VectorXd& uI, const Eigen::VectorXd& g) const {
        Eigen::VectorXd moved = uI - project(uI - g.cwiseQuotient(w));
        return std::sqrt(moved.dot(MI * moved));
    }
    double mnorm(const Eigen::VectorXd& v) const { return std::sqrt(v.dot(MI * v)); }
    double relative_residual(const Eigen::VectorXd& uI) const {
        DiscreteFunction u = lift(uI);
        Eigen::VectorXd res = weak_residual(*forms, model->params, u);
        return res.cwiseAbs().maxCoeff() / weak_residual_scale(*forms, model->params, u);
    }
};

bool nodal_in_cone(const BilinearForms& forms, const DiscreteFunction& u, double tol) {
    const std::size_t nI = forms.n_interior();
    for (std::size_t i = 0; i < nI; ++i) {
        if (u[i] < -tol) return false;
        if (i > 0 && u[i] < u[i - 1] - tol) return false;
    }
    return true;
}

// a few backtracked projected-descent steps; returns the new point
Eigen::VectorXd descend(const CondensedModel& cm, Eigen::VectorXd uI, int steps, double& tau,
                        double* energy_out = nullptr) {
    double E0 = cm.E(uI);
    for (int k = 0; k < steps; ++k) {
        Eigen::VectorXd g = cm.grad(uI);
        bool accepted = false;
        for (int bt = 0; bt < 50; ++bt) {
            Eigen::VectorXd cand = cm.project(uI - tau * g.cwiseQuotient(cm.w));
            double Ec = cm.E(cand);
            if (Ec <= E0) {
                uI = std::move(cand);
                E0 = Ec;
                tau *= 1.5;
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) break;
    }
    if (energy_out) *energy_out = E0;
    return uI;
}

}  // namespace

SolverResult gradient_flow(const EnergyModel& model, const DiscreteFunction& u0,
                           const FlowOptions& opts) {
    CondensedModel cm(model);
    Eigen::VectorXd uI = cm.project(cm.forms->interior(u0));
    double E0 = cm.E(uI);
    double tau = 1.0;
    SolverResult out;
    out.converged = false;
    int it = 0;
    for (; it < opts.max_iters; ++it) {
        Eigen::VectorXd g = cm.grad(uI);
        double pg = cm.pg_norm(uI, g);
        double scale = 1.0 + cm.mnorm(uI);
        if (pg <= opts.pg_tol * scale) {
            out.converged = true;
            out.status = "projected gradient below tolerance";
            break;
        }
        // collapse onto the constant manifold at a classifiable value is a
        // terminal state: constants evolve by the scalar dynamics only and no
        // non-constant attractor remains (see gradient-flow notes in README)
        double cmean = cm.w.dot(uI) / cm.w.sum();
        Eigen::VectorXd dev = uI.array() - cmean;
        if (cm.mnorm(dev) <= opts.constancy_tol * scale &&
            (std::abs(cmean) <= opts.classification_tol ||
             std::abs(cmean - 1.0) <= opts.classification_tol)) {
            out.converged = true;
            out.status = "collapsed onto the constant manifold";
            break;
        }
        if (uI.cwiseAbs().maxCoeff() > opts.blowup_cap) {
            out.status = "runaway along the constant direction";
            break;
        }
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            Eigen::VectorXd cand = cm.project(uI - tau * g.cwiseQuotient(cm.w));
            double Ec = cm.E(cand);
            if (Ec <= E0) {
                uI = std::move(cand);
                E0 = Ec;
                tau *= 1.6;
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) {
            out.status = "step size underflow";
            break;
        }
    }
    if (it == opts.max_iters) out.status = "iteration cap reached";
    out.iterations = it;
    out.u = cm.lift(uI);
    out.energy = E0;
    out.residual_norm = cm.relative_residual(uI);
    out.classification = classify(*cm.forms, out.u, opts.classification_tol);
    out.in_cone = nodal_in_cone(*cm.forms, out.u, 0.0);
    return out;
}

SolverResult newton_refine(const EnergyModel& model, const DiscreteFunction& u,
                           const NewtonOptions& opts) {
    CondensedModel cm(model);
    const std::size_t nI = cm.nI;
    Eigen::VectorXd uI = cm.forms->interior(u);
    SolverResult out;
    double rel = cm.relative_residual(uI);
    int it = 0;
    for (; it < opts.max_iters && rel > opts.tol; ++it) {
        DiscreteFunction uf = cm.lift(uI);
        Eigen::VectorXd F = cm.grad(uI);
        // second variation: d*S~ + M - int g'(u) phi_i phi_j (consistent weighting)
        Eigen::MatrixXd J = model.params.d * cm.forms->condensed_stiffness() + cm.MI;
        const RadialMesh& mesh = *cm.forms->mesh;
        const double surf = unit_sphere_measure(cm.forms->cfg.n);
        for (std::size_t k = 0; k + 1 < nI; ++k) {
            double a = mesh.interior_nodes[k], b = mesh.interior_nodes[k + 1];
            QuadRule g = mapped_gauss(8, a, b);
            double j00 = 0, j01 = 0, j11 = 0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                double r = g.x[i];
                double wg = g.w[i] * surf * std::pow(r, cm.forms->cfg.n - 1.0) *
                            g_trunc_prime(model.params, uf.value_at(r));
                double pl = (b - r) / (b - a), pr = (r - a) / (b - a);
                j00 += wg * pl * pl;
                j01 += wg * pl * pr;
                j11 += wg * pr * pr;
            }
            J(k, k) -= j00;
            J(k, k + 1) -= j01;
            J(k + 1, k) -= j01;
            J(k + 1, k + 1) -= j11;
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
        Eigen::VectorXd delta = lu.solve(F);
        if (!delta.allFinite() || (J * delta - F).norm() > 1e-8 * std::max(F.norm(), 1e-300)) {
            out.status = "singular Jacobian";
            out.converged = false;
            out.u = cm.lift(uI);
            out.energy = cm.E(uI);
            out.residual_norm = rel;
            out.iterations = it;
            out.classification = classify(*cm.forms, out.u, 1e-4);
            out.in_cone = nodal_in_cone(*cm.forms, out.u, 0.0);
            return out;
        }
        uI -= delta;
        double rel_new = cm.relative_residual(uI);
        if (!(rel_new < rel) && rel < 1e3 * opts.tol) {
            rel = std::min(rel, rel_new);
            break;  // stagnation at round-off level
        }
        rel = rel_new;
    }
    out.converged = rel <= std::max(opts.tol, 1e-10);
    out.status = out.converged ? "newton converged" : "newton did not reach tolerance";
    out.iterations = it;
    out.u = cm.lift(uI);
    out.energy = cm.E(uI);
    out.residual_norm = rel;
    out.classification = classify(*cm.forms, out.u, 1e-4);
    out.in_cone = nodal_in_cone(*cm.forms, out.u, 0.0);
    return out;
}

SolverResult mountain_pass(const EnergyModel& model, const SpectralResult& spectral,
                           const MountainPassOptions& opts) {
    CondensedModel cm(model);
    const std::size_t nI = cm.nI;
    const int R = std::max(5, opts.path_resolution);

    Eigen::VectorXd phi2 = cm.forms->interior(spectral.phi2);
    double tbar = opts.t_bar;
    while (tbar > 1e-12 && (1.0 + tbar * phi2.minCoeff()) < 0.0) tbar *= 0.5;
    Eigen::VectorXd w = Eigen::VectorXd::Ones(nI) + tbar * phi2;

    double t_inf = 2.0;
    bool found = false;
    for (int k = 0; k < 60; ++k) {
        if (cm.E(t_inf * w) < 0.0) {
            found = true;
            break;
        }
        t_inf *= 2.0;
    }
    SolverResult out;
    if (!found) {
        out.status = "endpoint search failed: no negative-energy point on the ray";
        return out;
    }

    std::vector<Eigen::VectorXd> path(R);
    for (int j = 0; j < R; ++j)
        path[j] = cm.project((double)j / (R - 1) * t_inf * w);
    std::vector<double> Es(R);
    for (int j = 0; j < R; ++j) Es[j] = cm.E(path[j]);
    std::vector<double> taus(R, 1.0);

    auto retension = [&]() {
        std::vector<double> arc(R, 0.0);
        for (int j = 1; j < R; ++j) arc[j] = arc[j - 1] + cm.mnorm(path[j] - path[j - 1]);
        if (arc[R - 1] <= 0.0) return;
        std::vector<Eigen::VectorXd> np(R);
        np[0] = path[0];
        np[R - 1] = path[R - 1];
        for (int j = 1; j + 1 < R; ++j) {
            double target = arc[R - 1] * j / (R - 1);
            int seg = (int)(std::upper_bound(arc.begin(), arc.end(), target) - arc.begin()) - 1;
            seg = std::clamp(seg, 0, R - 2);
            double t = (target - arc[seg]) / std::max(arc[seg + 1] - arc[seg], 1e-300);
            np[j] = cm.project(path[seg] + t * (path[seg + 1] - path[seg]));
        }
        path = std::move(np);
        for (int j = 0; j < R; ++j) Es[j] = cm.E(path[j]);
    };

    int deformations = 0;
    int m = 1;
    for (; deformations < opts.max_deformations; ++deformations) {
        m = 1;
        for (int j = 2; j + 1 < R; ++j)
            if (Es[j] > Es[m]) m = j;
        Eigen::VectorXd g = cm.grad(path[m]);
        double scale = 1.0 + cm.mnorm(path[m]);
        if (cm.pg_norm(path[m], g) <= opts.pg_tol * scale) break;

        int lo = std::max(1, m - opts.window), hi = std::min(R - 2, m + opts.window);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int j = lo; j <= hi; ++j)
            path[j] = descend(cm, path[j], opts.descent_steps, taus[j], &Es[j]);
        retension();
    }

    double path_max = *std::max_element(Es.begin() + 1, Es.end() - 1);
    SolverResult refined = newton_refine(model, cm.lift(path[m]), opts.newton);
    refined.path_max_energy = path_max;
    refined.iterations = deformations;
    if (deformations >= opts.max_deformations && !refined.converged)
        refined.status = "deformation cap reached";

    // snap round-off cone violations, keeping the residual verified afterwards
    if (!refined.in_cone) {
        DiscreteFunction snapped = cone_project(*cm.forms, refined.u);
        double drift = 0.0;
        for (std::size_t i = 0; i < nI; ++i)
            drift = std::max(drift, std::abs(snapped[i] - refined.u[i]));
        if (drift < 1e-10) {
            Eigen::VectorXd uI = cm.forms->interior(snapped);
            refined.u = snapped;
            refined.residual_norm = cm.relative_residual(uI);
            refined.energy = cm.E(uI);
            refined.in_cone = nodal_in_cone(*cm.forms, refined.u, 0.0);
        }
    }
    refined.classification = classify(*cm.forms, refined.u, opts.classification_tol);
    return refined;
}

std::vector<ExpansionRow> energy_expansion_check(const EnergyModel& model,
                                                 const SpectralResult& spectral,
                                                 const std::vector<double>& t_values) {
    if (!(model.params.t0 > 1.0))
        throw std::invalid_argument("energy_expansion_check: needs t0 > 1");
    const BilinearForms& forms = *model.forms;
    const std::size_t nI = forms.n_interior();
    Eigen::VectorXd phi2 = forms.interior(spectral.phi2);
    Eigen::MatrixXd MI = forms.mass.topLeftCorner(nI, nI);
    Eigen::VectorXd lump = forms.lumped_mass.head(nI);
    double volB = lump.sum();
    double phi_mass = lump.dot(phi2);  // ~0: phi2 is zero-mean
    double phi_l2sq = phi2.dot(MI * phi2);

    double d = model.params.d, q = model.params.q;
    double coef = 0.5 * (d * spectral.lambda2_r_plus - q + 2.0) * phi_l2sq;

    DiscreteFunction one(forms.mesh, 1.0);
    forms.slave_exterior(one);
    EnergyModel m2 = model;
    double E1 = energy(m2, one);

    std::vector<ExpansionRow> rows;
    for (double t : t_values) {
        ExpansionRow row;
        row.t = t;
        double c = volB / (volB + t * phi_mass);  // mass-preserving normalization of v_t
        Eigen::VectorXd vI = c * (Eigen::VectorXd::Ones(nI) + t * phi2);
        DiscreteFunction vt = forms.from_interior(vI);
        row.measured = energy(m2, vt) - E1;
        row.predicted = t * t * coef;
        row.ratio = row.predicted != 0.0 ? row.measured / row.predicted : 0.0;
        rows.push_back(row);
    }
    return rows;
}

void write_solver_result(std::ostream& os, const SolverResult& r, int n, double s) {
    os << "energy=" << fmt17(r.energy) << "\n";
    os << "residual_norm=" << fmt17(r.residual_norm) << "\n";
    os << "classification=" << to_string(r.classification) << "\n";
    os << "in_cone=" << (r.in_cone ? 1 : 0) << "\n";
    os << "iterations=" << r.iterations << "\n";
    os << "path_max_energy=" << fmt17(r.path_max_energy) << "\n";
    os << "converged=" << (r.converged ? 1 : 0) << "\n";
    os << "status=" << r.status << "\n";
    write_profile(os, r.u, n, s);
}

void write_solver_result_file(const std::string& path, const SolverResult& r, int n, double s) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_solver_result_file: cannot open " + path);
    write_solver_result(os, r, n, s);
}

}  // namespace fracneu
