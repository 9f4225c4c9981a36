#pragma once

namespace fracneu {

inline constexpr const char* kVersion = "0.1.0";

/// Identifier of the kernel normalization in use; printed by --version and in
/// every constants report so downstream numbers are interpretable.
inline constexpr const char* kNormalizationId =
    "c_{n,s} = s 4^s Gamma((n+2s)/2) / (pi^{n/2} Gamma(1-s))  [Fourier symbol |xi|^{2s}]";

}  // namespace fracneu
