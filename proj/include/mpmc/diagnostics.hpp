#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mpmc/types.hpp"

namespace mpmc {

/// Counters accumulated over a chain. All integer fields merge by summation,
/// so merging is associative and commutative on them.
struct ChainStats {
    std::uint64_t n_total = 0;
    std::map<int, std::uint64_t> forward_hist;   ///< solution count -> iterations
    std::map<int, std::uint64_t> backward_hist;  ///< same, for the reversibility check
    std::uint64_t n_reversibility_invoked = 0;
    std::uint64_t n_reversibility_passed = 0;
    std::uint64_t n_accepted_moves = 0;
    double sum_jump_distance = 0.0;
    std::uint64_t n_large_jumps = 0;  ///< sign changes of x_1
    std::map<int, std::uint64_t> component_occupancy;
    std::map<std::pair<int, int>, std::uint64_t> component_transitions;

    // Iterations on which a hybrid scheme ran its expensive solver.
    std::uint64_t n_expensive = 0;
    std::uint64_t n_expensive_accepted = 0;
    double sum_jump_expensive = 0.0;

    /// Reversibility matches whose stored multiplier disagrees with the
    /// closed-form value by more than 1e-6 (position still decides).
    std::uint64_t n_multiplier_mismatch = 0;
    /// All-roots backward solves that did not actually contain the start state.
    std::uint64_t n_waived_membership_misses = 0;
    /// Ranked selection fell back to uniform because no row matched the set size.
    std::uint64_t n_omega_fallbacks = 0;

    double wall_time_seconds = 0.0;

    void merge(const ChainStats& other);
    /// Equality on everything except wall time.
    bool same_counts(const ChainStats& other) const;
};

ChainStats merge(ChainStats a, const ChainStats& b);

struct SummaryRates {
    double fsr = 0.0;
    std::optional<double> bsr;  ///< null when the check never ran
    double tar = 0.0;
    std::optional<double> mean_jump;  ///< null when no move was accepted
    double large_jump_rate = 0.0;
    double ctf = 0.0;
    std::optional<double> expensive_tar;
    std::optional<double> expensive_mean_jump;
};

/// Throws EmptyStats when n_total == 0.
SummaryRates summary_rates(const ChainStats& stats);

struct Histogram1D {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::uint64_t> bins;
    std::uint64_t n_samples = 0;

    Histogram1D(double lo, double hi, std::size_t n_bins);
    /// Values outside [lo, hi] are clamped into the edge bins.
    void add(double value);
    double bin_width() const { return (hi - lo) / static_cast<double>(bins.size()); }
};

struct GofResult {
    double statistic = 0.0;
    double p_value = 0.0;
    int dof = 0;
};

/// Pearson chi-square of `hist` against `density` integrated over each bin.
/// The density is normalized over [lo, hi]. Throws SparseBins if any expected
/// count is below 5.
GofResult chi_square_gof(const Histogram1D& hist, const std::function<double(double)>& density);

struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Torus observables ----------------------------------------------------------

struct TorusAngles {
    double phi = 0.0;
    double theta = 0.0;
};

/// Angles of x = ((R + r cos phi) cos theta, (R + r cos phi) sin theta, r sin phi).
/// Throws OffManifold when x is further than `tol` from the torus.
TorusAngles torus_angles(const Vec& x, double big_r, double small_r, double tol = 1e-6);
Vec torus_point(double phi, double theta, double big_r, double small_r);

/// Marginal density of phi under the normalized surface measure.
double torus_phi_reference_density(double phi, double big_r, double small_r);

// 9D sphere components ------------------------------------------------------

/// Component id from the sign pattern of (x_1, x_2, x_3): (+,+,+) -> 0,
/// (+,-,-) -> 1, (-,+,-) -> 2, (-,-,+) -> 3. Throws InvalidSignPattern otherwise.
int sphere_component(const Vec& x);

}  // namespace mpmc
