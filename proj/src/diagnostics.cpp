#include "mpmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mpmc/error.hpp"

namespace mpmc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class Map>
void add_counts(Map& into, const Map& from) {
    for (const auto& [key, count] : from) into[key] += count;
}

double wrap_angle(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

// Asymptotic Kolmogorov survival function Q(lambda).
double kolmogorov_q(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16 * std::abs(sum)) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

void ChainStats::merge(const ChainStats& o) {
    n_total += o.n_total;
    add_counts(forward_hist, o.forward_hist);
    add_counts(backward_hist, o.backward_hist);
    n_reversibility_invoked += o.n_reversibility_invoked;
    n_reversibility_passed += o.n_reversibility_passed;
    n_accepted_moves += o.n_accepted_moves;
    sum_jump_distance += o.sum_jump_distance;
    n_large_jumps += o.n_large_jumps;
    add_counts(component_occupancy, o.component_occupancy);
    add_counts(component_transitions, o.component_transitions);
    n_expensive += o.n_expensive;
    n_expensive_accepted += o.n_expensive_accepted;
    sum_jump_expensive += o.sum_jump_expensive;
    n_multiplier_mismatch += o.n_multiplier_mismatch;
    n_waived_membership_misses += o.n_waived_membership_misses;
    n_omega_fallbacks += o.n_omega_fallbacks;
    wall_time_seconds += o.wall_time_seconds;
}

bool ChainStats::same_counts(const ChainStats& o) const {
    return n_total == o.n_total && forward_hist == o.forward_hist &&
           backward_hist == o.backward_hist &&
           n_reversibility_invoked == o.n_reversibility_invoked &&
           n_reversibility_passed == o.n_reversibility_passed &&
           n_accepted_moves == o.n_accepted_moves && sum_jump_distance == o.sum_jump_distance &&
           n_large_jumps == o.n_large_jumps && component_occupancy == o.component_occupancy &&
           component_transitions == o.component_transitions && n_expensive == o.n_expensive &&
           n_expensive_accepted == o.n_expensive_accepted &&
           sum_jump_expensive == o.sum_jump_expensive &&
           n_multiplier_mismatch == o.n_multiplier_mismatch &&
           n_waived_membership_misses == o.n_waived_membership_misses &&
           n_omega_fallbacks == o.n_omega_fallbacks;
}

ChainStats merge(ChainStats a, const ChainStats& b) {
    a.merge(b);
    return a;
}

SummaryRates summary_rates(const ChainStats& s) {
    if (s.n_total == 0) throw Error(ErrorCode::EmptyStats, "no iterations recorded");
    const double n = static_cast<double>(s.n_total);
    SummaryRates r;
    const auto zero = s.forward_hist.find(0);
    const std::uint64_t n_empty = zero == s.forward_hist.end() ? 0 : zero->second;
    r.fsr = static_cast<double>(s.n_total - n_empty) / n;
    if (s.n_reversibility_invoked > 0) {
        r.bsr = static_cast<double>(s.n_reversibility_passed) /
                static_cast<double>(s.n_reversibility_invoked);
    }
    r.tar = static_cast<double>(s.n_accepted_moves) / n;
    if (s.n_accepted_moves > 0) {
        r.mean_jump = s.sum_jump_distance / static_cast<double>(s.n_accepted_moves);
    }
    r.large_jump_rate = static_cast<double>(s.n_large_jumps) / n;
    std::uint64_t switches = 0;
    for (const auto& [edge, count] : s.component_transitions) {
        if (edge.first != edge.second) switches += count;
    }
    r.ctf = static_cast<double>(switches) / n;
    if (s.n_expensive > 0) {
        r.expensive_tar =
            static_cast<double>(s.n_expensive_accepted) / static_cast<double>(s.n_expensive);
    }
    if (s.n_expensive_accepted > 0) {
        r.expensive_mean_jump = s.sum_jump_expensive / static_cast<double>(s.n_expensive_accepted);
    }
    return r;
}

Histogram1D::Histogram1D(double lo_, double hi_, std::size_t n_bins)
    : lo(lo_), hi(hi_), bins(n_bins, 0) {
    if (!(hi > lo) || n_bins == 0) {
        throw Error(ErrorCode::InvalidConfig, "histogram needs hi > lo and at least one bin");
    }
}

void Histogram1D::add(double value) {
    const double t = (value - lo) / (hi - lo) * static_cast<double>(bins.size());
    const auto last = static_cast<double>(bins.size() - 1);
    const auto idx = static_cast<std::size_t>(std::clamp(std::floor(t), 0.0, last));
    ++bins[idx];
    ++n_samples;
}

GofResult chi_square_gof(const Histogram1D& hist, const std::function<double(double)>& density) {
    using boost::math::quadrature::gauss;
    const std::size_t nb = hist.bins.size();
    std::vector<double> mass(nb);
    double total = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
        const double a = hist.lo + hist.bin_width() * static_cast<double>(i);
        const double b = a + hist.bin_width();
        mass[i] = gauss<double, 15>::integrate(density, a, b);
        total += mass[i];
    }
    GofResult res;
    const double n = static_cast<double>(hist.n_samples);
    for (std::size_t i = 0; i < nb; ++i) {
        const double expected = n * mass[i] / total;
        if (!(expected >= 5.0)) {
            throw Error(ErrorCode::SparseBins,
                        "expected count " + std::to_string(expected) + " below 5 in bin " +
                            std::to_string(i));
        }
        const double diff = static_cast<double>(hist.bins[i]) - expected;
        res.statistic += diff * diff / expected;
    }
    res.dof = static_cast<int>(nb) - 1;
    res.p_value = boost::math::gamma_q(0.5 * res.dof, 0.5 * res.statistic);
    return res;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyStats, "KS test needs two samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

TorusAngles torus_angles(const Vec& x, double big_r, double small_r, double tol) {
    const double rho = std::hypot(x[0], x[1]);
    const double off = std::hypot(rho - big_r, x[2]) - small_r;
    if (!(std::abs(off) <= tol)) {
        throw Error(ErrorCode::OffManifold,
                    "point is " + std::to_string(off) + " away from the torus");
    }
    TorusAngles a;
    a.theta = wrap_angle(std::atan2(x[1], x[0]));
    a.phi = wrap_angle(std::atan2(x[2] / small_r, (rho - big_r) / small_r));
    return a;
}

Vec torus_point(double phi, double theta, double big_r, double small_r) {
    Vec x(3);
    const double ring = big_r + small_r * std::cos(phi);
    x << ring * std::cos(theta), ring * std::sin(theta), small_r * std::sin(phi);
    return x;
}

double torus_phi_reference_density(double phi, double big_r, double small_r) {
    return (1.0 + small_r / big_r * std::cos(phi)) / kTwoPi;
}

int sphere_component(const Vec& x) {
    const bool s1 = x[0] > 0.0;
    const bool s2 = x[1] > 0.0;
    const bool s3 = x[2] > 0.0;
    if (s1 && s2 && s3) return 0;
    if (s1 && !s2 && !s3) return 1;
    if (!s1 && s2 && !s3) return 2;
    if (!s1 && !s2 && s3) return 3;
    throw Error(ErrorCode::InvalidSignPattern, "sign pattern of (x1, x2, x3) matches no component");
}

}  // namespace mpmc
