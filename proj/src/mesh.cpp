#include "fracneu/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "fracneu/format.hpp"

namespace fracneu {

void RadialMesh::validate() const {
    if (interior_nodes.size() < 2 || interior_nodes.front() != 0.0 ||
        interior_nodes.back() != 1.0)
        throw std::invalid_argument("RadialMesh: interior nodes must span [0,1]");
    if (!(R_ext > 1.0)) throw std::invalid_argument("RadialMesh: R_ext must exceed 1");
    if (exterior_nodes.empty() || exterior_nodes.back() != R_ext)
        throw std::invalid_argument("RadialMesh: exterior nodes must end at R_ext");
    for (std::size_t i = 0; i + 1 < interior_nodes.size(); ++i)
        if (!(interior_nodes[i] < interior_nodes[i + 1]))
            throw std::invalid_argument("RadialMesh: interior nodes not strictly increasing");
    if (!(exterior_nodes.front() > 1.0))
        throw std::invalid_argument("RadialMesh: exterior nodes must start above 1");
    for (std::size_t i = 0; i + 1 < exterior_nodes.size(); ++i)
        if (!(exterior_nodes[i] < exterior_nodes[i + 1]))
            throw std::invalid_argument("RadialMesh: exterior nodes not strictly increasing");
}

RadialMesh build_mesh(int n_interior, int n_exterior, double R_ext, double grading) {
    if (n_interior < 8) throw std::invalid_argument("build_mesh: need n_interior >= 8");
    if (n_exterior < 4) throw std::invalid_argument("build_mesh: need n_exterior >= 4");
    if (!(R_ext > 1.0)) throw std::invalid_argument("build_mesh: need R_ext > 1");
    if (!(grading >= 1.0)) throw std::invalid_argument("build_mesh: need grading >= 1");
    RadialMesh m;
    m.R_ext = R_ext;
    m.grading_exponent = grading;
    m.interior_nodes.resize(n_interior);
    for (int i = 0; i < n_interior; ++i)
        m.interior_nodes[i] = (double)i / (double)(n_interior - 1);
    m.interior_nodes.front() = 0.0;
    m.interior_nodes.back() = 1.0;
    m.exterior_nodes.resize(n_exterior);
    for (int j = 1; j <= n_exterior; ++j)
        m.exterior_nodes[j - 1] = 1.0 + (R_ext - 1.0) * std::pow((double)j / n_exterior, grading);
    m.exterior_nodes.back() = R_ext;
    m.validate();
    return m;
}

RadialMesh mesh_from_nodes(const std::vector<double>& nodes) {
    RadialMesh m;
    for (double r : nodes) {
        if (r <= 1.0)
            m.interior_nodes.push_back(r);
        else
            m.exterior_nodes.push_back(r);
    }
    if (m.exterior_nodes.empty())
        throw std::invalid_argument("mesh_from_nodes: no exterior nodes");
    m.R_ext = m.exterior_nodes.back();
    m.validate();
    return m;
}

DiscreteFunction::DiscreteFunction(std::shared_ptr<const RadialMesh> mesh,
                                   std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (values_.size() != mesh_->n_nodes())
        throw std::invalid_argument("DiscreteFunction: value count differs from node count");
}

DiscreteFunction::DiscreteFunction(std::shared_ptr<const RadialMesh> mesh, double constant)
    : mesh_(std::move(mesh)), values_(mesh_->n_nodes(), constant) {}

double DiscreteFunction::value_at(double r) const {
    const RadialMesh& m = *mesh_;
    if (r >= m.R_ext) return values_.back();
    if (r <= 0.0) return values_.front();
    // locate on the combined grid
    std::size_t nI = m.n_interior();
    auto locate = [&](const std::vector<double>& nodes, std::size_t offset) {
        auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
        std::size_t hi = (std::size_t)(it - nodes.begin());
        double x0, x1;
        std::size_t i0, i1;
        if (hi == 0) {
            // r below first exterior node: bridge panel [1, first exterior]
            x0 = 1.0;
            x1 = nodes[0];
            i0 = offset - 1;
            i1 = offset;
        } else {
            x0 = nodes[hi - 1];
            x1 = nodes[hi];
            i0 = offset + hi - 1;
            i1 = offset + hi;
        }
        double t = (r - x0) / (x1 - x0);
        return values_[i0] + t * (values_[i1] - values_[i0]);
    };
    if (r <= 1.0) {
        auto it = std::upper_bound(m.interior_nodes.begin(), m.interior_nodes.end(), r);
        std::size_t hi = std::min((std::size_t)(it - m.interior_nodes.begin()), nI - 1);
        if (hi == 0) hi = 1;
        double x0 = m.interior_nodes[hi - 1], x1 = m.interior_nodes[hi];
        double t = (r - x0) / (x1 - x0);
        return values_[hi - 1] + t * (values_[hi] - values_[hi - 1]);
    }
    return locate(m.exterior_nodes, nI);
}

double DiscreteFunction::interpolate_on(double r, std::size_t k) const {
    const auto& xs = mesh_->interior_nodes;
    double t = (r - xs[k]) / (xs[k + 1] - xs[k]);
    return values_[k] + t * (values_[k + 1] - values_[k]);
}

double DiscreteFunction::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

DiscreteFunction interpolate(std::shared_ptr<const RadialMesh> mesh,
                             const std::function<double(double)>& profile) {
    std::vector<double> v(mesh->n_nodes());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = profile(mesh->node(i));
    return DiscreteFunction(std::move(mesh), std::move(v));
}

void write_profile(std::ostream& os, const DiscreteFunction& u, int n, double s) {
    os << "# frac-neumann profile n=" << n << " s=" << fmt17(s)
       << " R_ext=" << fmt17(u.mesh().R_ext) << "\n";
    for (std::size_t i = 0; i < u.size(); ++i)
        os << fmt17(u.mesh().node(i)) << " " << fmt17(u[i]) << "\n";
}

void write_profile_file(const std::string& path, const DiscreteFunction& u, int n, double s) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_profile_file: cannot open " + path);
    write_profile(os, u, n, s);
}

StoredProfile read_profile(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("# frac-neumann profile", 0) != 0)
        throw std::runtime_error("read_profile: missing profile header");
    StoredProfile out;
    {
        auto grab = [&](const std::string& key) -> std::string {
            auto pos = header.find(key + "=");
            if (pos == std::string::npos)
                throw std::runtime_error("read_profile: header lacks " + key);
            pos += key.size() + 1;
            auto end = header.find(' ', pos);
            return header.substr(pos, end == std::string::npos ? end : end - pos);
        };
        out.n = std::stoi(grab("n"));
        out.s = std::strtod(grab("s").c_str(), nullptr);
    }
    std::vector<double> nodes, vals;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const char* p = line.c_str();
        char* q = nullptr;
        double r = std::strtod(p, &q);
        double v = std::strtod(q, nullptr);
        nodes.push_back(r);
        vals.push_back(v);
    }
    auto mesh = std::make_shared<RadialMesh>(mesh_from_nodes(nodes));
    out.u = DiscreteFunction(mesh, std::move(vals));
    return out;
}

StoredProfile read_profile_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_profile_file: cannot open " + path);
    return read_profile(is);
}

}  // namespace fracneu
