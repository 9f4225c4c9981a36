#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace fracneu {

/// Radial grid: interior nodes in [0,1] including both endpoints, exterior
/// nodes in (1, R_ext] including R_ext. Profiles are piecewise linear between
/// nodes and constant beyond R_ext.
struct RadialMesh {
    std::vector<double> interior_nodes;
    std::vector<double> exterior_nodes;
    double R_ext = 0.0;
    double grading_exponent = 1.0;

    std::size_t n_interior() const { return interior_nodes.size(); }
    std::size_t n_exterior() const { return exterior_nodes.size(); }
    std::size_t n_nodes() const { return interior_nodes.size() + exterior_nodes.size(); }
    double node(std::size_t i) const {
        return i < interior_nodes.size() ? interior_nodes[i]
                                         : exterior_nodes[i - interior_nodes.size()];
    }
    void validate() const;
};

/// Uniform interior grid, exterior graded toward r = 1 with the given exponent.
RadialMesh build_mesh(int n_interior, int n_exterior, double R_ext, double grading);

/// Mesh from an explicit sorted node list (used when reading stored profiles).
RadialMesh mesh_from_nodes(const std::vector<double>& nodes);

struct DiscreteFunction {
    DiscreteFunction() = default;
    DiscreteFunction(std::shared_ptr<const RadialMesh> mesh, std::vector<double> values);
    explicit DiscreteFunction(std::shared_ptr<const RadialMesh> mesh, double constant = 0.0);

    const RadialMesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const RadialMesh>& mesh_ptr() const { return mesh_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Piecewise-linear interpolation; constant beyond R_ext.
    double value_at(double r) const;
    /// Interpolation on a known interior panel (fast path for quadrature loops).
    double interpolate_on(double r, std::size_t interior_panel) const;

    double max_abs() const;

  private:
    std::shared_ptr<const RadialMesh> mesh_;
    std::vector<double> values_;
};

/// Sample a radial profile at every node.
DiscreteFunction interpolate(std::shared_ptr<const RadialMesh> mesh,
                             const std::function<double(double)>& profile);

/// Plain-text profile format:
///   # frac-neumann profile n=<n> s=<s> R_ext=<R>
///   <r> <value>            (one node per line, 17 significant digits)
/// Round-trips bit-exactly.
void write_profile(std::ostream& os, const DiscreteFunction& u, int n, double s);
void write_profile_file(const std::string& path, const DiscreteFunction& u, int n, double s);

struct StoredProfile {
    DiscreteFunction u;
    int n = 1;
    double s = 0.5;
};
StoredProfile read_profile(std::istream& is);
StoredProfile read_profile_file(const std::string& path);

}  // namespace fracneu
