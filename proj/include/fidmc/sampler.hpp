#pragma once

#include <cstdint>
#include <vector>

#include "fidmc/densities.hpp"
#include "fidmc/model.hpp"
#include "fidmc/preimage.hpp"

namespace fidmc {

struct SamplerConfig {
    std::size_t n_draws = 1'000'000;
    std::uint64_t seed = 1;
    Tolerance tol = kRootTol;
    PathOverride path_override = PathOverride::None;
    bool retain_gamma = false;
    unsigned threads = 1;  // 0 picks the hardware concurrency
};

struct FiducialSample {
    Scenario scenario;
    LpdDescriptor lpd;
    std::uint64_t seed;
    std::vector<double> draws;
    std::vector<double> gamma_draws;  // filled only when retain_gamma is set
};

// Draws from the conditional fiducial density by the two-stage recipe:
// gamma from the post-data support, then theta from the slice that gamma
// induces. Draw i is a pure function of (seed, i), so results are
// bit-identical for any thread count. The applicability conditions are
// re-verified on a coarse grid at setup and violations abort the run.
FiducialSample draw_fiducial(const Scenario& sc, const LpdDescriptor& lpd,
                             const PostDataSupport& support,
                             const SamplerConfig& config);

// The fiducial density on a theta grid by direct quadrature: for each
// theta, the slice normalizer integrated over the gamma band that maps
// theta to the observed count, times the kernel at theta. gamma_nodes
// (>= 64) sets the base panelization of the band; each panel is then
// integrated adaptively, which matters near the band ends where slice
// normalizers steepen toward the gamma = 0, 1 degeneracies.
// A restricted support confines the band to its intervals and scales by
// the support renormalizer. Grid points must lie inside the domain.
std::vector<double> fiducial_pdf_numeric(const Scenario& sc, const LpdDescriptor& lpd,
                                         const std::vector<double>& theta_grid,
                                         int gamma_nodes = 256,
                                         const PostDataSupport& support = full_support(),
                                         unsigned threads = 1);

} // namespace fidmc
