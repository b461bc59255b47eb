#include "morse/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "morse/errors.hpp"

namespace morse {

namespace {

template <std::size_t N>
using Vec = std::array<double, N>;

enum class Stop { Completed, Escaped, StepLimit };

template <std::size_t N>
struct Outcome {
    Vec<N> y;
    double s = 0.0;
    Stop status = Stop::Completed;
};

template <std::size_t N>
bool all_finite(const Vec<N>& y) {
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

template <std::size_t N>
double error_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1,
                  const IntegratorConfig& cfg) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(N));
}

// Dormand-Prince 5(4) tableau.
namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner, contd5).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace dp

template <std::size_t N, class Rhs>
double initial_step(Rhs& rhs, const Vec<N>& y0, const Vec<N>& f0, double span,
                    const IntegratorConfig& cfg) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = cfg.atol + cfg.rtol * std::abs(y0[i]);
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Vec<N> y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y0[i] + h0 * f0[i];
    const Vec<N> f1 = rhs(h0, y1);
    double d2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = cfg.atol + cfg.rtol * std::abs(y0[i]);
        const double r = (f1[i] - f0[i]) / sc;
        d2 += r * r;
    }
    d2 = std::sqrt(d2 / N) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, span});
}

// Adaptive Dormand-Prince over s in [0, span]. `samples` are ascending s
// values in [0, span]; emit(i, y) receives the dense-output state for each.
// A step whose end fails inside(y) ends the run at the last state inside.
template <std::size_t N, class Rhs, class Emit, class Inside>
Outcome<N> run_dopri(Rhs&& rhs, Vec<N> y, double span, const IntegratorConfig& cfg,
                     std::span<const double> samples, Emit&& emit, Inside&& inside) {
    std::size_t next = 0;
    while (next < samples.size() && samples[next] <= 0.0) emit(next++, y);
    if (span <= 0.0) return {y, 0.0, Stop::Completed};

    Vec<N> k1 = rhs(0.0, y);
    double h = initial_step<N>(rhs, y, k1, span, cfg);
    double s = 0.0;
    std::size_t steps = 0;
    bool rejected_last = false;

    while (s < span) {
        if (steps++ >= cfg.max_steps) return {y, s, Stop::StepLimit};
        bool last = false;
        if (s + 1.01 * h >= span) {
            h = span - s;
            last = true;
        }
        if (!(h > 1e-14 * std::max(1.0, s))) return {y, s, Stop::StepLimit};

        Vec<N> yt, k2, k3, k4, k5, k6;
        using namespace dp;
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * a21 * k1[i];
        k2 = rhs(s + c2 * h, yt);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = rhs(s + c3 * h, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs(s + c4 * h, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs(s + c5 * h, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                a65 * k5[i]);
        const double s_new = last ? span : s + h;
        k6 = rhs(s_new, yt);
        Vec<N> y_new;
        for (std::size_t i = 0; i < N; ++i)
            y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                                   b6 * k6[i]);
        const Vec<N> k7 = rhs(s_new, y_new);
        Vec<N> err;
        for (std::size_t i = 0; i < N; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                          e7 * k7[i]);
        double en = error_norm<N>(err, y, y_new, cfg);
        if (!std::isfinite(en) || !all_finite(y_new)) {
            // Either a genuine blow-up or a step far too large; shrink and retry.
            if (h < 1e-12 * std::max(1.0, s)) return {y, s, Stop::Escaped};
            h *= 0.1;
            rejected_last = true;
            continue;
        }

        if (en <= 1.0) {
            if (!inside(y_new)) return {y, s, Stop::Escaped};
            if (next < samples.size() && samples[next] <= s_new) {
                Vec<N> r1 = y, r2, r3, r4, r5;
                for (std::size_t i = 0; i < N; ++i) {
                    r2[i] = y_new[i] - y[i];
                    r3[i] = h * k1[i] - r2[i];
                    r4[i] = r2[i] - h * k7[i] - r3[i];
                    r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                 d6 * k6[i] + d7 * k7[i]);
                }
                while (next < samples.size() && samples[next] <= s_new) {
                    if (samples[next] == s_new) {
                        emit(next++, y_new);
                        continue;
                    }
                    const double th = (samples[next] - s) / h;
                    const double th1 = 1.0 - th;
                    Vec<N> yd;
                    for (std::size_t i = 0; i < N; ++i)
                        yd[i] = r1[i] +
                                th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
                    emit(next++, yd);
                }
            }
            y = y_new;
            k1 = k7;
            s = s_new;
            double fac = en == 0.0 ? 10.0 : 0.9 * std::pow(en, -0.2);
            fac = std::clamp(fac, 0.2, rejected_last ? 1.0 : 10.0);
            h *= fac;
            rejected_last = false;
        } else {
            h *= std::clamp(0.9 * std::pow(en, -0.2), 0.2, 1.0);
            rejected_last = true;
        }
    }
    return {y, span, Stop::Completed};
}

// Classical fourth-order Runge-Kutta with n equal steps covering [0, span];
// samples between steps use cubic Hermite interpolation.
template <std::size_t N, class Rhs, class Emit, class Inside>
Outcome<N> run_rk4(Rhs&& rhs, Vec<N> y, double span, const IntegratorConfig& cfg,
                   std::span<const double> samples, Emit&& emit, Inside&& inside) {
    std::size_t next = 0;
    while (next < samples.size() && samples[next] <= 0.0) emit(next++, y);
    if (span <= 0.0) return {y, 0.0, Stop::Completed};
    const double steps_real = std::ceil(span / cfg.step * (1.0 - 1e-12));
    const auto n = static_cast<std::size_t>(std::max(1.0, steps_real));
    if (n > cfg.max_steps) return {y, 0.0, Stop::StepLimit};
    const double h = span / static_cast<double>(n);

    Vec<N> f = rhs(0.0, y);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double s_new = k + 1 == n ? span : static_cast<double>(k + 1) * h;
        Vec<N> yt, k2, k3, k4;
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + 0.5 * h * f[i];
        k2 = rhs(s + 0.5 * h, yt);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + 0.5 * h * k2[i];
        k3 = rhs(s + 0.5 * h, yt);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * k3[i];
        k4 = rhs(s_new, yt);
        Vec<N> y_new;
        for (std::size_t i = 0; i < N; ++i)
            y_new[i] = y[i] + h / 6.0 * (f[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!all_finite(y_new) || !inside(y_new)) return {y, s, Stop::Escaped};
        const Vec<N> f_new = rhs(s_new, y_new);
        while (next < samples.size() && samples[next] <= s_new) {
            if (samples[next] == s_new) {
                emit(next++, y_new);
                continue;
            }
            const double th = (samples[next] - s) / h;
            const double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
            const double h10 = th * (1 - th) * (1 - th);
            const double h01 = th * th * (3 - 2 * th);
            const double h11 = th * th * (th - 1);
            Vec<N> yd;
            for (std::size_t i = 0; i < N; ++i)
                yd[i] = h00 * y[i] + h10 * h * f[i] + h01 * y_new[i] + h11 * h * f_new[i];
            emit(next++, yd);
        }
        y = y_new;
        f = f_new;
        s = s_new;
    }
    return {y, span, Stop::Completed};
}

template <std::size_t N, class Rhs, class Emit, class Inside>
Outcome<N> run(Rhs&& rhs, const Vec<N>& y, double span, const IntegratorConfig& cfg,
               std::span<const double> samples, Emit&& emit, Inside&& inside) {
    if (cfg.method == Method::Rk4) return run_rk4<N>(rhs, y, span, cfg, samples, emit, inside);
    return run_dopri<N>(rhs, y, span, cfg, samples, emit, inside);
}

// dy/ds for t = t0 + direction * s.
auto phase_rhs(const MorseParams& params, double t0, double direction) {
    return [&params, t0, direction](double s, const Vec<2>& y) {
        const PhaseVelocity v = vector_field(params, {y[0], y[1]}, t0 + direction * s);
        return Vec<2>{direction * v.dq, direction * v.dp};
    };
}

}  // namespace

const char* to_string(Method method) noexcept {
    return method == Method::Rk4 ? "rk4" : "dopri45";
}

void validate(const IntegratorConfig& cfg) {
    if (cfg.method == Method::Rk4 && !(cfg.step > 0.0 && std::isfinite(cfg.step)))
        throw DomainError("IntegratorConfig.step must be > 0");
    if (!(cfg.rtol > 0.0 && cfg.atol > 0.0))
        throw DomainError("IntegratorConfig.rtol and atol must be > 0");
    if (cfg.max_steps == 0) throw DomainError("IntegratorConfig.max_steps must be > 0");
}

TrajectorySample integrate_to(const MorseParams& params, const PhaseState& s0, double t0,
                              double t1, const IntegratorConfig& cfg,
                              std::span<const double> sample_times) {
    validate(params);
    validate(cfg);
    if (!std::isfinite(t0) || !std::isfinite(t1) || !std::isfinite(s0.q) || !std::isfinite(s0.p))
        throw DomainError("integrate_to: non-finite initial data");
    const double direction = t1 >= t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);

    std::vector<double> times(sample_times.begin(), sample_times.end());
    if (times.empty()) times = {t0, t1};
    const double lo = std::min(t0, t1), hi = std::max(t0, t1);
    for (double t : times)
        if (!(t >= lo && t <= hi))
            throw DomainError("integrate_to: sample time outside the integration interval");
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    if (direction < 0.0) std::reverse(times.begin(), times.end());

    std::vector<double> s_samples(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        s_samples[i] = times[i] == t1 ? span : std::abs(times[i] - t0);

    TrajectorySample out;
    out.rows.resize(times.size());
    auto emit = [&](std::size_t i, const Vec<2>& y) {
        const PhaseState st{y[0], y[1]};
        out.rows[i] = {times[i], st.q, st.p, hamiltonian(params, st)};
    };
    auto inside = [&](const Vec<2>& y) { return cfg.domain.contains({y[0], y[1]}); };
    const Outcome<2> res =
        run<2>(phase_rhs(params, t0, direction), Vec<2>{s0.q, s0.p}, span, cfg, s_samples,
               emit, inside);

    const PhaseState last{res.y[0], res.y[1]};
    const double last_t = t0 + direction * res.s;
    if (res.status == Stop::Escaped)
        throw EscapeError("integrate_to: trajectory escaped at t = " + std::to_string(last_t),
                          last, last_t);
    if (res.status == Stop::StepLimit)
        throw StepLimitError("integrate_to: step budget exhausted at t = " + std::to_string(last_t),
                             last, last_t);
    if (direction < 0.0) std::reverse(out.rows.begin(), out.rows.end());
    return out;
}

PhaseState flow(const MorseParams& params, const PhaseState& s0, double t0, double t1,
                const IntegratorConfig& cfg) {
    const double at[] = {t1};
    const TrajectorySample ts = integrate_to(params, s0, t0, t1, cfg, at);
    return {ts.rows.back().q, ts.rows.back().p};
}

namespace {

StroboscopicOrbit trace_stroboscopic(const MorseParams& params, const PhaseState& s0,
                                     double t_start, std::size_t n_iterates,
                                     const IntegratorConfig& cfg, bool rethrow) {
    validate(params);
    if (!params.forced()) throw DomainError("stroboscopic_map: requires epsilon > 0");
    StroboscopicOrbit orbit;
    orbit.t_start = t_start;
    orbit.forcing_period = 2.0 * std::numbers::pi / params.omega;
    orbit.states.reserve(n_iterates + 1);
    orbit.states.push_back(s0);
    PhaseState s = s0;
    for (std::size_t n = 0; n < n_iterates; ++n) {
        const double ta = t_start + static_cast<double>(n) * orbit.forcing_period;
        const double tb = t_start + static_cast<double>(n + 1) * orbit.forcing_period;
        try {
            s = flow(params, s, ta, tb, cfg);
        } catch (const IntegrationError&) {
            if (rethrow) throw;
            orbit.escaped = true;
            break;
        }
        orbit.states.push_back(s);
    }
    return orbit;
}

}  // namespace

StroboscopicOrbit stroboscopic_map(const MorseParams& params, const PhaseState& s0,
                                   double t_start, std::size_t n_iterates,
                                   const IntegratorConfig& cfg) {
    return trace_stroboscopic(params, s0, t_start, n_iterates, cfg, true);
}

StroboscopicOrbit stroboscopic_orbit(const MorseParams& params, const PhaseState& s0,
                                     double t_start, std::size_t n_iterates,
                                     const IntegratorConfig& cfg) {
    return trace_stroboscopic(params, s0, t_start, n_iterates, cfg, false);
}

double default_q_ceiling(const MorseParams& params) noexcept {
    return 8.0 / params.alpha * std::numbers::ln10;
}

DescriptorValue arclength_descriptor(const MorseParams& params, const PhaseState& s0,
                                     double t_center, double tau, const IntegratorConfig& cfg,
                                     double q_ceiling) {
    if (!(q_ceiling > 0.0)) q_ceiling = default_q_ceiling(params);
    DescriptorValue out;
    if (!(s0.q <= q_ceiling)) {
        out.escaped = true;
        return out;
    }
    auto inside = [q_ceiling](const Vec<3>& y) { return y[0] <= q_ceiling; };
    auto ignore = [](std::size_t, const Vec<3>&) {};

    for (const double direction : {1.0, -1.0}) {
        auto rhs = [&params, t_center, direction](double s, const Vec<3>& y) {
            const PhaseVelocity v =
                vector_field(params, {y[0], y[1]}, t_center + direction * s);
            return Vec<3>{direction * v.dq, direction * v.dp,
                          std::sqrt(v.dq * v.dq + v.dp * v.dp)};
        };
        const Outcome<3> res = run<3>(rhs, Vec<3>{s0.q, s0.p, 0.0}, tau, cfg, {}, ignore, inside);
        out.value += res.y[2];
        if (res.status == Stop::Escaped) out.escaped = true;
        if (res.status == Stop::StepLimit) out.failed = true;
    }
    return out;
}

}  // namespace morse
