#include "morse/melnikov.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "morse/errors.hpp"

namespace morse {

namespace {

void require_forced(const MorseParams& params, const char* op) {
    validate(params);
    if (!params.forced())
        throw DomainError(std::string(op) + ": requires epsilon > 0 (the function vanishes identically)");
}

}  // namespace

double melnikov_decay_rate(const MorseParams& params) noexcept {
    return std::sqrt(params.m / (2.0 * params.D * params.alpha * params.alpha));
}

double melnikov_analytic(const MorseParams& params, double t0, double phi0) {
    require_forced(params, "melnikov_analytic");
    const double amplitude = params.epsilon * 2.0 * params.m / params.alpha *
                             std::exp(-params.omega * melnikov_decay_rate(params));
    return -amplitude * std::sin(params.omega * t0 + phi0);
}

double melnikov_analytic_derivative(const MorseParams& params, double t0, double phi0) {
    require_forced(params, "melnikov_analytic_derivative");
    const double amplitude = params.epsilon * 2.0 * params.m / params.alpha *
                             std::exp(-params.omega * melnikov_decay_rate(params));
    return -amplitude * params.omega * std::cos(params.omega * t0 + phi0);
}

std::vector<MelnikovZero> melnikov_zeros(const MorseParams& params, double phi0, double t_begin,
                                         double t_end) {
    require_forced(params, "melnikov_zeros");
    std::vector<MelnikovZero> out;
    if (!(t_begin <= t_end)) return out;
    const double pi = std::numbers::pi;
    const double w = params.omega;
    const double threshold = 1e-12 * params.epsilon * 2.0 * params.m / params.alpha;
    const auto k_lo = static_cast<long long>(std::ceil((w * t_begin + phi0) / pi)) - 1;
    const auto k_hi = static_cast<long long>(std::floor((w * t_end + phi0) / pi)) + 1;
    for (long long k = k_lo; k <= k_hi; ++k) {
        const double t0 = (static_cast<double>(k) * pi - phi0) / w;
        if (t0 < t_begin || t0 > t_end) continue;
        const double slope = melnikov_analytic_derivative(params, t0, phi0);
        out.push_back({t0, slope > 0.0 ? 1 : (slope < 0.0 ? -1 : 0),
                       std::abs(slope) > threshold});
    }
    return out;
}

MelnikovScan melnikov_scan(const MorseParams& params, const std::vector<double>& t0_grid,
                           double phi0, const oracle::MelnikovOptions& oracle_cfg) {
    require_forced(params, "melnikov_scan");
    MelnikovScan scan;
    scan.params = params;
    scan.rows.resize(t0_grid.size());
    const auto n = static_cast<long long>(t0_grid.size());

#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < n; ++i) {
        MelnikovRow& row = scan.rows[static_cast<std::size_t>(i)];
        row.t0 = t0_grid[static_cast<std::size_t>(i)];
        row.phi0 = phi0;
        row.m_analytic = melnikov_analytic(params, row.t0, phi0);
        try {
            const oracle::QuadratureResult q =
                oracle::melnikov_quadrature(params, row.t0, phi0, oracle_cfg);
            row.m_numeric = q.value;
            row.tail_bound = q.error_estimate;
        } catch (const std::exception& e) {
            row.m_numeric = std::numeric_limits<double>::quiet_NaN();
            row.tail_bound = std::numeric_limits<double>::quiet_NaN();
            row.error = e.what();
        }
    }

    double num = 0.0, den = 0.0;
    for (const MelnikovRow& row : scan.rows) {
        if (row.error || !(std::abs(row.m_numeric) > 10.0 * row.tail_bound)) continue;
        num += row.m_analytic * row.m_numeric;
        den += row.m_numeric * row.m_numeric;
        ++scan.ratio_rows;
    }
    if (scan.ratio_rows == 0) {
        scan.ratio = scan.ratio_spread = std::numeric_limits<double>::quiet_NaN();
        return scan;
    }
    scan.ratio = num / den;
    double spread = 0.0;
    for (const MelnikovRow& row : scan.rows) {
        if (row.error || !(std::abs(row.m_numeric) > 10.0 * row.tail_bound)) continue;
        spread = std::max(spread, std::abs(row.m_analytic / row.m_numeric / scan.ratio - 1.0));
    }
    scan.ratio_spread = spread;
    return scan;
}

std::vector<double> melnikov_numeric_zeros(const MorseParams& params, double phi0,
                                           double t_begin, double t_end, double tolerance,
                                           const oracle::MelnikovOptions& oracle_cfg,
                                           int samples_per_half_period) {
    require_forced(params, "melnikov_numeric_zeros");
    if (!(t_begin < t_end) || samples_per_half_period < 1 || !(tolerance > 0.0))
        throw DomainError("melnikov_numeric_zeros: bad window, sampling or tolerance");
    auto M = [&](double t0) { return oracle::melnikov_quadrature(params, t0, phi0, oracle_cfg).value; };

    const double half = std::numbers::pi / params.omega;
    const auto n = static_cast<std::size_t>(
        std::ceil((t_end - t_begin) / half * samples_per_half_period));
    std::vector<double> grid(n + 1), values(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        grid[i] = t_begin + (t_end - t_begin) * static_cast<double>(i) / static_cast<double>(n);
    const auto count = static_cast<long long>(n + 1);
    std::vector<std::string> failures(n + 1);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            values[k] = M(grid[k]);
        } catch (const std::exception& e) {
            failures[k] = e.what();
        }
    }
    for (const std::string& f : failures)
        if (!f.empty()) throw NumericFailure("melnikov_numeric_zeros: " + f, 0.0);

    std::vector<double> zeros;
    for (std::size_t i = 0; i < n; ++i) {
        const double fa = values[i], fb = values[i + 1];
        if (fa == 0.0) {
            zeros.push_back(grid[i]);
            continue;
        }
        if (!(fa * fb < 0.0)) continue;
        std::uintmax_t max_iter = 200;
        auto done = [tolerance](double a, double b) { return std::abs(b - a) <= tolerance; };
        const auto bracket =
            boost::math::tools::toms748_solve(M, grid[i], grid[i + 1], fa, fb, done, max_iter);
        zeros.push_back(0.5 * (bracket.first + bracket.second));
    }
    if (values[n] == 0.0) zeros.push_back(grid[n]);
    return zeros;
}

}  // namespace morse
