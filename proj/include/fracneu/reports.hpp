#pragma once

#include <string>
#include <vector>

#include "fracneu/bounds.hpp"
#include "fracneu/nonlinear.hpp"
#include "fracneu/spectrum.hpp"

namespace fracneu {

void write_constants_txt(const std::string& path, const ConstantsReport& rep);
void write_constants_json(const std::string& path, const ConstantsReport& rep);

/// CSV `name,value,residual,restarts` for the spectral quantities.
void write_spectrum_csv(const std::string& path, const SpectralResult& sp);

struct SweepRow {
    double d = 0.0, q = 0.0, s = 0.0;
    int n = 1;
    std::string classification;
    double energy = 0.0, residual = 0.0, linf = 0.0;
    double d_star = 0.0, d_star_star = 0.0, lambda2r_plus = 0.0;
    bool hypothesis_ok = false;
};

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace fracneu
