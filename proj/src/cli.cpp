#include "morse/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include "morse/analytic.hpp"
#include "morse/errors.hpp"
#include "morse/io.hpp"
#include "morse/melnikov.hpp"

namespace morse::cli {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Typed access to one JSON object. Every key read is remembered so that
// finish() can reject unknown keys; defaults are recorded by path.
class Reader {
public:
    Reader(const json& obj, std::string path, std::vector<std::string>& defaulted)
        : obj_(obj), path_(std::move(path)), defaulted_(defaulted) {
        if (!obj_.is_object()) throw ConfigError(path_, "expected a JSON object");
    }

    std::string key_path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key);
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) {
            defaulted_.push_back(key_path(key));
            return fallback;
        }
        return as_number(raw(key), key_path(key));
    }

    double required_number(const std::string& key) {
        if (!has(key)) throw ConfigError(key_path(key), "required key is missing");
        return as_number(raw(key), key_path(key));
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return as_number(raw(key), key_path(key));
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        if (!has(key)) {
            defaulted_.push_back(key_path(key));
            return fallback;
        }
        const json& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ConfigError(key_path(key), "expected a non-negative integer");
        return v.get<std::size_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) {
            defaulted_.push_back(key_path(key));
            return fallback;
        }
        const json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(key_path(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) {
            defaulted_.push_back(key_path(key));
            return fallback;
        }
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(key_path(key), "expected a string");
        return v.get<std::string>();
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(key_path(it.key()), "unknown key");
    }

    static double as_number(const json& v, const std::string& path) {
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            const auto& s = v.get_ref<const std::string&>();
            if (s == "inf") return kInf;
            if (s == "-inf") return -kInf;
        }
        throw ConfigError(path, "expected a number");
    }

private:
    const json& obj_;
    std::string path_;
    std::vector<std::string>& defaulted_;
    std::set<std::string> seen_;
};

json number_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(Reader::as_number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<PhaseState> state_list(const json& v, const std::string& path,
                                   std::vector<std::string>& defaulted) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of {\"q\", \"p\"} objects");
    std::vector<PhaseState> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        Reader r(v[i], path + "[" + std::to_string(i) + "]", defaulted);
        PhaseState s{r.required_number("q"), r.required_number("p")};
        r.finish();
        out.push_back(s);
    }
    return out;
}

json state_json(const PhaseState& s) { return {{"q", s.q}, {"p", s.p}}; }

MorseParams parse_params(const json* v, std::vector<std::string>& defaulted) {
    static const json empty = json::object();
    Reader r(v ? *v : empty, "params", defaulted);
    MorseParams p;
    p.D = r.number("D", 10.0);
    p.alpha = r.number("alpha", 1.0);
    p.m = r.number("m", 8.0);
    p.epsilon = r.number("epsilon", 0.0);
    p.omega = r.number("omega", 0.0);
    r.finish();
    try {
        validate(p);
    } catch (const DomainError& e) {
        throw ConfigError("params", e.what());
    }
    return p;
}

IntegratorConfig parse_integrator(Reader& parent, const std::string& key,
                                  std::vector<std::string>& defaulted, bool with_domain,
                                  const IntegratorConfig& base) {
    static const json empty = json::object();
    const bool present = parent.has(key);
    if (!present) defaulted.push_back(parent.key_path(key));
    Reader r(present ? parent.raw(key) : empty, parent.key_path(key), defaulted);
    IntegratorConfig cfg = base;
    const std::string method = r.string("method", to_string(base.method));
    if (method == "rk4")
        cfg.method = Method::Rk4;
    else if (method == "dopri45")
        cfg.method = Method::Dopri45;
    else
        throw ConfigError(r.key_path("method"), "expected \"rk4\" or \"dopri45\"");
    cfg.step = r.number("step", base.step);
    cfg.rtol = r.number("rtol", base.rtol);
    cfg.atol = r.number("atol", base.atol);
    cfg.max_steps = r.count("max_steps", base.max_steps);
    if (with_domain) {
        const bool has_domain = r.has("domain");
        if (!has_domain) defaulted.push_back(r.key_path("domain"));
        Reader d(has_domain ? r.raw("domain") : empty, r.key_path("domain"), defaulted);
        cfg.domain.q_min = d.number("q_min", base.domain.q_min);
        cfg.domain.q_max = d.number("q_max", base.domain.q_max);
        cfg.domain.p_min = d.number("p_min", base.domain.p_min);
        cfg.domain.p_max = d.number("p_max", base.domain.p_max);
        d.finish();
        if (!(cfg.domain.q_min < cfg.domain.q_max && cfg.domain.p_min < cfg.domain.p_max))
            throw ConfigError(r.key_path("domain"), "empty domain box");
    }
    r.finish();
    try {
        validate(cfg);
    } catch (const DomainError& e) {
        throw ConfigError(parent.key_path(key), e.what());
    }
    return cfg;
}

json integrator_json(const IntegratorConfig& cfg, bool with_domain) {
    json j = {{"method", to_string(cfg.method)},
              {"step", cfg.step},
              {"rtol", cfg.rtol},
              {"atol", cfg.atol},
              {"max_steps", cfg.max_steps}};
    if (with_domain)
        j["domain"] = {{"q_min", number_json(cfg.domain.q_min)},
                       {"q_max", number_json(cfg.domain.q_max)},
                       {"p_min", number_json(cfg.domain.p_min)},
                       {"p_max", number_json(cfg.domain.p_max)}};
    return j;
}

void require(bool ok, const std::string& key, const std::string& message) {
    if (!ok) throw ConfigError(key, message);
}

// Default admissible box for stroboscopic iteration: the free-flight ceiling
// on the right, a deep point of the repulsive wall on the left.
IntegratorConfig poincare_integrator_defaults(const MorseParams& params) {
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    cfg.domain.q_min = -5.0 / params.alpha;
    cfg.domain.q_max = default_q_ceiling(params);
    cfg.domain.p_min = -1e3;
    cfg.domain.p_max = 1e3;
    return cfg;
}

CommandBlock parse_block(const std::string& command, Reader& r, const MorseParams& p,
                         std::vector<std::string>& defaulted) {
    const std::string path = r.key_path("");
    auto key = [&](const std::string& k) { return r.key_path(k); };

    if (command == "phase-portrait") {
        PhasePortraitBlock b;
        if (r.has("levels"))
            b.levels = number_list(r.raw("levels"), key("levels"));
        else
            defaulted.push_back(key("levels"));
        b.samples = r.count("samples", b.samples);
        b.t_max = r.number("t_max", b.t_max);
        for (std::size_t i = 0; i < b.levels.size(); ++i)
            require(b.levels[i] >= 0.0 && std::isfinite(b.levels[i]),
                    key("levels") + "[" + std::to_string(i) + "]", "energy must be finite and >= 0");
        require(b.samples >= 2, key("samples"), "must be >= 2");
        require(b.t_max > 0.0, key("t_max"), "must be > 0");
        return b;
    }
    if (command == "trajectory") {
        TrajectoryBlock b;
        b.h = r.optional_number("h");
        if (r.has("s0")) {
            Reader s(r.raw("s0"), key("s0"), defaulted);
            b.s0 = PhaseState{s.required_number("q"), s.required_number("p")};
            s.finish();
        }
        require(b.h.has_value() != b.s0.has_value(), path, "exactly one of \"h\" or \"s0\" is required");
        b.method = r.string("method", b.s0 ? "numeric" : "analytic");
        require(b.method == "analytic" || b.method == "numeric", key("method"),
                "expected \"analytic\" or \"numeric\"");
        b.t_start = r.number("t_start", b.t_start);
        b.t_end = r.number("t_end", b.t_end);
        b.samples = r.count("samples", b.samples);
        IntegratorConfig base;
        base.rtol = 1e-12;
        base.atol = 1e-12;
        b.integrator = parse_integrator(r, "integrator", defaulted, true, base);
        require(b.samples >= 2, key("samples"), "must be >= 2");
        require(b.t_end > b.t_start, key("t_end"), "must be > t_start");
        if (b.h) require(*b.h >= 0.0 && std::isfinite(*b.h), key("h"), "energy must be finite and >= 0");
        if (b.method == "analytic") {
            require(b.h.has_value(), key("method"), "analytic trajectories are selected by \"h\"");
            require(!p.forced(), key("method"), "analytic trajectories require epsilon = 0");
        }
        return b;
    }
    if (command == "period") {
        PeriodBlock b;
        require(r.has("h"), key("h"), "required key is missing");
        b.h = number_list(r.raw("h"), key("h"));
        for (std::size_t i = 0; i < b.h.size(); ++i)
            require(b.h[i] >= 0.0 && b.h[i] < p.D, key("h") + "[" + std::to_string(i) + "]",
                    "period requires 0 <= h < D");
        return b;
    }
    if (command == "action-angle") {
        ActionAngleBlock b;
        if (r.has("states")) b.states = state_list(r.raw("states"), key("states"), defaulted);
        if (r.has("action_angles")) {
            const json& list = r.raw("action_angles");
            require(list.is_array(), key("action_angles"), "expected an array of {\"I\", \"theta\"}");
            for (std::size_t i = 0; i < list.size(); ++i) {
                const std::string at = key("action_angles") + "[" + std::to_string(i) + "]";
                Reader e(list[i], at, defaulted);
                const double I = e.required_number("I");
                const double theta = e.required_number("theta");
                e.finish();
                require(I > 0.0 && I < max_action(p), at + ".I", "requires 0 < I < I_max");
                require(std::isfinite(theta), at + ".theta", "must be finite");
                b.action_angles.emplace_back(I, theta);
            }
        }
        require(!b.states.empty() || !b.action_angles.empty(), path,
                "needs \"states\" or \"action_angles\"");
        for (std::size_t i = 0; i < b.states.size(); ++i) {
            const double h = hamiltonian(p, b.states[i]);
            require(std::isfinite(h) && classify_energy(p, std::max(h, 0.0)).tag == Regime::Bounded,
                    key("states") + "[" + std::to_string(i) + "]", "state is not on a bounded orbit");
        }
        return b;
    }
    if (command == "homoclinic") {
        HomoclinicBlock b;
        b.t_start = r.number("t_start", b.t_start);
        b.t_end = r.number("t_end", b.t_end);
        b.samples = r.count("samples", b.samples);
        require(b.samples >= 2, key("samples"), "must be >= 2");
        require(b.t_end > b.t_start, key("t_end"), "must be > t_start");
        return b;
    }
    if (command == "melnikov") {
        MelnikovBlock b;
        require(p.forced(), "params.epsilon", "the Melnikov function requires epsilon > 0");
        require(r.has("t0"), key("t0"), "required key is missing");
        const json& t0 = r.raw("t0");
        if (t0.is_object()) {
            Reader g(t0, key("t0"), defaulted);
            Range range{g.required_number("start"), g.required_number("end"), g.count("count", 0)};
            g.finish();
            require(range.count >= 1, key("t0.count"), "must be >= 1");
            require(range.end >= range.start, key("t0.end"), "must be >= start");
            b.t0_range = range;
        } else {
            b.t0_list = number_list(t0, key("t0"));
            require(!b.t0_list.empty(), key("t0"), "must not be empty");
        }
        b.phi0 = r.number("phi0", b.phi0);
        b.t_cut = r.number("t_cut", b.t_cut);
        b.tolerance = r.number("tolerance", b.tolerance);
        require(b.t_cut >= 0.0, key("t_cut"), "must be >= 0 (0 selects 1e4 / omega)");
        require(b.tolerance > 0.0, key("tolerance"), "must be > 0");
        return b;
    }
    if (command == "poincare") {
        PoincareBlock b;
        require(p.forced(), "params.epsilon", "stroboscopic maps require epsilon > 0");
        require(r.has("seeds"), key("seeds"), "required key is missing");
        b.seeds = state_list(r.raw("seeds"), key("seeds"), defaulted);
        b.iterates = r.count("iterates", b.iterates);
        b.t_start = r.number("t_start", b.t_start);
        b.integrator = parse_integrator(r, "integrator", defaulted, true,
                                        poincare_integrator_defaults(p));
        return b;
    }
    // ld-map
    LdBlock b;
    static const json empty = json::object();
    const bool has_grid = r.has("grid");
    if (!has_grid) defaulted.push_back(key("grid"));
    Reader g(has_grid ? r.raw("grid") : empty, key("grid"), defaulted);
    b.grid.q_min = g.number("q_min", b.grid.q_min);
    b.grid.q_max = g.number("q_max", b.grid.q_max);
    b.grid.p_min = g.number("p_min", b.grid.p_min);
    b.grid.p_max = g.number("p_max", b.grid.p_max);
    b.grid.nq = g.count("nq", b.grid.nq);
    b.grid.np = g.count("np", b.grid.np);
    b.grid.t_center = g.number("t_center", b.grid.t_center);
    b.grid.tau = g.number("tau", b.grid.tau);
    g.finish();
    try {
        validate(b.grid);
    } catch (const DomainError& e) {
        throw ConfigError(key("grid"), e.what());
    }
    b.integrator = parse_integrator(r, "integrator", defaulted, false, IntegratorConfig{});
    b.q_ceiling = r.number("q_ceiling", default_q_ceiling(p));
    b.rescale = r.boolean("rescale", b.rescale);
    require(b.q_ceiling > 0.0, key("q_ceiling"), "must be > 0");
    return b;
}

json block_json(const CommandBlock& block) {
    return std::visit(
        [](const auto& b) -> json {
            using B = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<B, PhasePortraitBlock>) {
                return {{"levels", b.levels}, {"samples", b.samples}, {"t_max", b.t_max}};
            } else if constexpr (std::is_same_v<B, TrajectoryBlock>) {
                json j = {{"method", b.method},
                          {"t_start", b.t_start},
                          {"t_end", b.t_end},
                          {"samples", b.samples},
                          {"integrator", integrator_json(b.integrator, true)}};
                if (b.h) j["h"] = *b.h;
                if (b.s0) j["s0"] = state_json(*b.s0);
                return j;
            } else if constexpr (std::is_same_v<B, PeriodBlock>) {
                return {{"h", b.h}};
            } else if constexpr (std::is_same_v<B, ActionAngleBlock>) {
                json j = json::object();
                if (!b.states.empty()) {
                    j["states"] = json::array();
                    for (const auto& s : b.states) j["states"].push_back(state_json(s));
                }
                if (!b.action_angles.empty()) {
                    j["action_angles"] = json::array();
                    for (const auto& [I, th] : b.action_angles)
                        j["action_angles"].push_back({{"I", I}, {"theta", th}});
                }
                return j;
            } else if constexpr (std::is_same_v<B, HomoclinicBlock>) {
                return {{"t_start", b.t_start}, {"t_end", b.t_end}, {"samples", b.samples}};
            } else if constexpr (std::is_same_v<B, MelnikovBlock>) {
                json j = {{"phi0", b.phi0}, {"t_cut", b.t_cut}, {"tolerance", b.tolerance}};
                if (b.t0_range)
                    j["t0"] = {{"start", b.t0_range->start},
                               {"end", b.t0_range->end},
                               {"count", b.t0_range->count}};
                else
                    j["t0"] = b.t0_list;
                return j;
            } else if constexpr (std::is_same_v<B, PoincareBlock>) {
                json j = {{"iterates", b.iterates},
                          {"t_start", b.t_start},
                          {"integrator", integrator_json(b.integrator, true)}};
                j["seeds"] = json::array();
                for (const auto& s : b.seeds) j["seeds"].push_back(state_json(s));
                return j;
            } else {
                return {{"grid",
                         {{"q_min", b.grid.q_min},
                          {"q_max", b.grid.q_max},
                          {"p_min", b.grid.p_min},
                          {"p_max", b.grid.p_max},
                          {"nq", b.grid.nq},
                          {"np", b.grid.np},
                          {"t_center", b.grid.t_center},
                          {"tau", b.grid.tau}}},
                        {"integrator", integrator_json(b.integrator, false)},
                        {"q_ceiling", b.q_ceiling},
                        {"rescale", b.rescale}};
            }
        },
        block);
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = a;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i)
        out[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

int threads_from_env() {
    const char* v = std::getenv("MORSE_THREADS");
    if (!v || !*v) return 0;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) throw ConfigError("MORSE_THREADS", "expected a positive integer");
    return static_cast<int>(n);
}

// Tracks files written by a run so a numeric failure can remove them.
class Outputs {
public:
    std::ofstream open(const std::filesystem::path& path) {
        auto out = io::open_output(path);
        paths_.push_back(path);
        return out;
    }
    void remove_all() noexcept {
        for (const auto& p : paths_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
        paths_.clear();
    }
    void check(std::ofstream& out, const std::filesystem::path& path) {
        out.flush();
        if (!out) throw io::IoError("write failed for " + path.string());
    }

private:
    std::vector<std::filesystem::path> paths_;
};

struct Execution {
    json metadata = json::object();
    bool numeric_failure = false;
    std::string failure_message;
};

void write_trajectory_csv(std::ostream& out, const TrajectorySample& ts) {
    io::CsvWriter csv(out);
    csv.header({"t", "q", "p", "h"});
    for (const auto& r : ts.rows) {
        csv.field(r.t).field(r.q).field(r.p).field(r.h);
        csv.end_row();
    }
}

Execution execute(const RunConfig& cfg, Outputs& outputs, int threads) {
    Execution ex;
    const MorseParams& p = cfg.params;
    const std::filesystem::path out_path = cfg.output;

    if (const auto* b = std::get_if<PeriodBlock>(&cfg.block)) {
        auto out = outputs.open(out_path);
        io::CsvWriter csv(out);
        csv.header({"h", "T"});
        for (double h : b->h) {
            csv.field(h).field(period(p, h));
            csv.end_row();
        }
        outputs.check(out, out_path);
    } else if (const auto* b = std::get_if<HomoclinicBlock>(&cfg.block)) {
        auto out = outputs.open(out_path);
        io::CsvWriter csv(out);
        csv.header({"t", "q", "p"});
        for (double t : linspace(b->t_start, b->t_end, b->samples)) {
            const PhaseState s = homoclinic_orbit(p, t);
            csv.field(t).field(s.q).field(s.p);
            csv.end_row();
        }
        outputs.check(out, out_path);
    } else if (const auto* b = std::get_if<PhasePortraitBlock>(&cfg.block)) {
        auto out = outputs.open(out_path);
        io::CsvWriter csv(out);
        csv.header({"level", "h", "regime", "t", "q", "p"});
        for (std::size_t k = 0; k < b->levels.size(); ++k) {
            const double h = b->levels[k];
            const EnergyRegime regime = classify_energy(p, h);
            std::vector<double> times;
            switch (regime.tag) {
                case Regime::Elliptic: times = {0.0}; break;
                case Regime::Bounded: times = linspace(0.0, period(p, h), b->samples); break;
                default: times = linspace(-b->t_max, b->t_max, b->samples); break;
            }
            for (const auto& row : sample_closed_form(p, h, times).rows) {
                csv.field(static_cast<long long>(k)).field(h).field(std::string(to_string(regime.tag)));
                csv.field(row.t).field(row.q).field(row.p);
                csv.end_row();
            }
        }
        outputs.check(out, out_path);
    } else if (const auto* b = std::get_if<TrajectoryBlock>(&cfg.block)) {
        const std::vector<double> times = linspace(b->t_start, b->t_end, b->samples);
        TrajectorySample ts;
        if (b->method == "analytic") {
            ts = sample_closed_form(p, *b->h, times);
        } else {
            PhaseState s0;
            if (b->s0) {
                s0 = *b->s0;
            } else {
                const auto start = sample_closed_form(p, *b->h, {b->t_start}).rows.front();
                s0 = {start.q, start.p};
            }
            ts = integrate_to(p, s0, b->t_start, b->t_end, b->integrator, times);
        }
        auto out = outputs.open(out_path);
        write_trajectory_csv(out, ts);
        outputs.check(out, out_path);
    } else if (const auto* b = std::get_if<ActionAngleBlock>(&cfg.block)) {
        auto out = outputs.open(out_path);
        io::CsvWriter csv(out);
        csv.header({"q", "p", "h", "I", "theta"});
        for (const PhaseState& s : b->states) {
            const ActionAngle aa = angle_of_state(p, s);
            csv.field(s.q).field(s.p).field(aa.regime.h).field(aa.I).field(aa.theta);
            csv.end_row();
        }
        for (const auto& [I, theta] : b->action_angles) {
            const PhaseState s = state_of_action_angle(p, {I, theta, {}});
            csv.field(s.q).field(s.p).field(energy_of_action(p, I)).field(I).field(theta);
            csv.end_row();
        }
        outputs.check(out, out_path);
    } else if (const auto* b = std::get_if<MelnikovBlock>(&cfg.block)) {
        std::vector<double> grid = b->t0_range
                                       ? linspace(b->t0_range->start, b->t0_range->end, b->t0_range->count)
                                       : b->t0_list;
        oracle::MelnikovOptions opts;
        opts.t_cut = b->t_cut;
        opts.relative_tolerance = b->tolerance;
        const MelnikovScan scan = melnikov_scan(p, grid, b->phi0, opts);
        auto out = outputs.open(out_path);
        io::CsvWriter csv(out);
        csv.header({"t0", "phi0", "M_analytic", "M_numeric", "tail_bound"});
        for (const MelnikovRow& row : scan.rows) {
            csv.field(row.t0).field(row.phi0).field(row.m_analytic).field(row.m_numeric).field(row.tail_bound);
            csv.end_row();
            if (row.error) {
                ex.numeric_failure = true;
                ex.failure_message = *row.error;
            }
        }
        outputs.check(out, out_path);
        ex.metadata["fitted_ratio"] = number_json(scan.ratio);
        ex.metadata["ratio_spread"] = number_json(scan.ratio_spread);
        ex.metadata["ratio_rows"] = scan.ratio_rows;
        ex.metadata["t_cut"] = b->t_cut > 0.0 ? b->t_cut : 1e4 / p.omega;
        json zeros = json::array();
        if (!grid.empty()) {
            const auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
            for (const MelnikovZero& z : melnikov_zeros(p, b->phi0, *lo, *hi))
                zeros.push_back({{"t0", z.t0}, {"derivative_sign", z.derivative_sign}, {"simple", z.simple}});
        }
        ex.metadata["analytic_zeros"] = zeros;
    } else if (const auto* b = std::get_if<PoincareBlock>(&cfg.block)) {
        const auto orbits = poincare_scatter(p, b->seeds, b->iterates, b->integrator, b->t_start, threads);
        auto out = outputs.open(out_path);
        io::CsvWriter csv(out);
        csv.header({"seed", "n", "t", "q", "p"});
        json escaped = json::array();
        for (std::size_t k = 0; k < orbits.size(); ++k) {
            const StroboscopicOrbit& o = orbits[k];
            for (std::size_t n = 0; n < o.states.size(); ++n) {
                csv.field(static_cast<long long>(k)).field(static_cast<long long>(n));
                csv.field(o.t_start + static_cast<double>(n) * o.forcing_period);
                csv.field(o.states[n].q).field(o.states[n].p);
                csv.end_row();
            }
            if (o.escaped) escaped.push_back(k);
        }
        outputs.check(out, out_path);
        ex.metadata["escaped_seeds"] = escaped;
    } else if (const auto* b = std::get_if<LdBlock>(&cfg.block)) {
        LdConfig ld{b->integrator, b->q_ceiling, threads};
        ScalarField field = ld_field(p, b->grid, ld);
        std::size_t flagged = 0;
        for (auto f : field.flags) flagged += f != CellStatus::Ok;
        if (b->rescale) field = arctan_rescale(field);
        if (cfg.format == "pgm") {
            auto out = outputs.open(out_path);
            io::write_pgm16(out, field.grid.nq, field.grid.np, io::field_pixels(field));
            outputs.check(out, out_path);
            const std::filesystem::path mask_path = cfg.output + ".mask.pgm";
            auto mask = outputs.open(mask_path);
            io::write_pgm8(mask, field.grid.nq, field.grid.np, io::field_mask(field));
            outputs.check(mask, mask_path);
            ex.metadata["mask"] = mask_path.string();
        } else {
            auto out = outputs.open(out_path);
            io::write_field_csv(out, field);
            outputs.check(out, out_path);
        }
        ex.metadata["flagged_cells"] = flagged;
        ex.metadata["rescale_scale"] = field.metadata.rescaled ? field.metadata.rescale_scale : 0.0;
        ex.metadata["escape_policy"] = "truncate at q_ceiling and flag";
        ex.metadata["cell_sampling"] = "cell centres";
    }
    return ex;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"phase-portrait", "trajectory", "period",
                                                "action-angle",   "homoclinic", "melnikov",
                                                "poincare",       "ld-map"};
    return names;
}

RunConfig parse_config(const std::string& command, const json& doc) {
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), command) == names.end())
        throw ConfigError("command", "unknown subcommand \"" + command + "\"");
    RunConfig cfg;
    cfg.command = command;
    Reader top(doc, "", cfg.defaulted);
    if (top.has("command")) {
        const json& c = top.raw("command");
        if (!c.is_string() || c.get<std::string>() != command)
            throw ConfigError("command", "does not match the subcommand \"" + command + "\"");
    }
    top.has("metadata");   // sidecar provenance, ignored on input
    for (const std::string& other : names)
        if (other != command && top.has(other))
            throw ConfigError(other, "only the \"" + command + "\" command block is allowed");
    cfg.params = parse_params(top.has("params") ? &top.raw("params") : nullptr, cfg.defaulted);
    if (!top.has(command)) throw ConfigError(command, "command block is missing");
    Reader block(top.raw(command), command, cfg.defaulted);
    cfg.block = parse_block(command, block, cfg.params, cfg.defaulted);
    block.finish();
    const std::string default_format = command == "ld-map" ? "pgm" : "csv";
    cfg.format = top.string("format", default_format);
    if (cfg.format != "csv" && !(cfg.format == "pgm" && command == "ld-map"))
        throw ConfigError("format", command == "ld-map" ? "expected \"csv\" or \"pgm\"" : "expected \"csv\"");
    cfg.output = top.string("output", command + "." + cfg.format);
    if (cfg.output.empty()) throw ConfigError("output", "must not be empty");
    top.finish();
    return cfg;
}

json to_json(const RunConfig& cfg) {
    json j;
    j["command"] = cfg.command;
    j["params"] = {{"D", cfg.params.D},
                   {"alpha", cfg.params.alpha},
                   {"m", cfg.params.m},
                   {"epsilon", cfg.params.epsilon},
                   {"omega", cfg.params.omega}};
    j[cfg.command] = block_json(cfg.block);
    j["output"] = cfg.output;
    j["format"] = cfg.format;
    return j;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Morse oscillator dynamics: closed forms, Melnikov analysis, Lagrangian descriptors"};
    app.require_subcommand(1);
    std::string config_path;
    std::string output_override;
    for (const std::string& name : subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("config", config_path, "JSON config file")->required();
        sub->add_option("-o,--output", output_override, "Override the output path");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    json doc;
    {
        std::ifstream in(config_path);
        if (!in) {
            err << "error: cannot read config " << config_path << "\n";
            return 1;
        }
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            err << "config error: (document) " << e.what() << "\n";
            return 2;
        }
    }

    RunConfig cfg;
    int threads = 0;
    try {
        cfg = parse_config(command, doc);
        if (!output_override.empty()) cfg.output = output_override;
        threads = threads_from_env();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    }

    Outputs outputs;
    try {
        Execution ex = execute(cfg, outputs, threads);
        if (ex.numeric_failure) {
            outputs.remove_all();
            err << "numeric failure: " << ex.failure_message << "\n";
            return 3;
        }
        json sidecar = to_json(cfg);
        ex.metadata["code_version"] = code_version();
        ex.metadata["defaulted"] = cfg.defaulted;
        sidecar["metadata"] = ex.metadata;
        const std::filesystem::path side_path = cfg.output + ".json";
        auto side = outputs.open(side_path);
        side << sidecar.dump(2) << "\n";
        outputs.check(side, side_path);
        out << cfg.output << "\n";
        return 0;
    } catch (const io::IoError& e) {
        outputs.remove_all();
        err << "I/O error: " << e.what() << "\n";
        return 1;
    } catch (const NumericFailure& e) {
        outputs.remove_all();
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const IntegrationError& e) {
        outputs.remove_all();
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const DomainError& e) {
        outputs.remove_all();
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace morse::cli
