#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <gluevar/gluevar.hpp>

namespace gluevar::cli {

using json = nlohmann::json;

enum Exit { ok = 0, verification_failed = 1, invalid_input = 2, unsupported_regime = 3, no_witness = 4 };

struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double parse_number(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (!s.empty() && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || !std::isfinite(v)) throw input_error("cannot parse " + what + ": '" + s + "'");
    return v;
}

inline GlueVaRParams parse_measure(const std::string& m) {
    auto colon = m.find(':');
    if (colon == std::string::npos) throw input_error("measure must look like kind:args");
    std::string kind = m.substr(0, colon);
    std::vector<double> args;
    std::stringstream ss(m.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) args.push_back(parse_number(tok, "measure argument"));
    auto need = [&](std::size_t n) {
        if (args.size() != n) throw input_error(kind + " takes " + std::to_string(n) + " argument(s)");
    };
    GlueVaRParams g;
    if (kind == "gluevar") {
        need(4);
        g = {args[0], args[1], args[2], args[3]};
    } else if (kind == "var") {
        need(1);
        g = {args[0], args[0], 0.0, 0.0};
    } else if (kind == "tvar") {
        need(1);
        g = {args[0], args[0], 1.0, 1.0};
    } else if (kind == "rvar") {
        need(2);
        if (!(args[0] < args[1])) throw input_error("rvar requires alpha < beta");
        g = {args[0], args[1], 0.0, 1.0};
    } else {
        throw input_error("unknown measure kind '" + kind + "'");
    }
    try {
        g.validate();
    } catch (const parameter_error& e) {
        throw input_error(e.what());
    }
    return g;
}

inline DistClass parse_class(const std::string& s) {
    if (s == "general") return DistClass::general;
    if (s == "symmetric") return DistClass::symmetric;
    throw input_error("class must be general or symmetric");
}

inline std::vector<Direction> parse_directions(const std::string& s) {
    if (s == "worst") return {Direction::worst};
    if (s == "best") return {Direction::best};
    if (s == "both") return {Direction::worst, Direction::best};
    throw input_error("direction must be worst, best or both");
}

inline unsigned default_threads() {
    if (const char* env = std::getenv("GLUEVAR_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n) on up to `threads` workers.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F body) {
    threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) body(i);
        });
    for (auto& th : pool) th.join();
}

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline json params_json(const GlueVaRParams& g) {
    return {{"alpha", g.alpha}, {"beta", g.beta}, {"h1", g.h1}, {"h2", g.h2}};
}

inline json quantile_json(const StepQuantile& q) {
    json a = json::array();
    for (const auto& at : q.atoms()) a.push_back({{"cum_prob", at.level}, {"value", at.value}});
    return a;
}

inline json intermediates_json(const ClosedFormIntermediates& m) {
    json j;
    j["k1"] = m.slopes.k1 ? json(*m.slopes.k1) : json(nullptr);
    j["k2"] = m.slopes.k2;
    j["k3"] = m.slopes.k3;
    auto opt = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    opt("eta", m.eta);
    opt("zeta", m.zeta);
    opt("xi", m.xi);
    opt("omega", m.omega);
    opt("nu", m.nu);
    opt("omega_as_printed", m.omega_as_printed);
    opt("nu_as_printed", m.nu_as_printed);
    j["lemma_integral"] = m.lemma_integral;
    j["weights"] = m.weights ? json(*m.weights) : json(nullptr);
    return j;
}

inline json result_json(const BoundResult& r) {
    json j;
    j["value"] = r.value;
    j["case"] = to_string(r.case_id.label);
    j["direction"] = to_string(r.case_id.direction);
    j["class"] = to_string(r.case_id.cls);
    if (r.case_id.regime != Regime::none) j["regime"] = to_string(r.case_id.regime);
    j["attained_by_any"] = r.attained_by_any;
    j["attainment"] = to_string(r.attainment);
    j["infimum_not_attained"] = r.case_id.direction == Direction::best && r.bound_not_attained();
    j["supremum_not_attained"] = r.case_id.direction == Direction::worst && r.bound_not_attained();
    j["intermediates"] = intermediates_json(r.intermediates);
    if (r.sharp_value) j["sharp_value"] = *r.sharp_value;
    j["witness"] = r.witness ? quantile_json(*r.witness) : json(nullptr);
    j["moment_residual"] = r.moment_residual;
    j["attainment_residual"] = r.attainment_residual;
    return j;
}

struct Common {
    std::string measure;
    std::string mu = "0";
    std::string sigma = "1";
    std::string cls = "general";
    std::string direction = "worst";
    std::string engine = "closed";
};

inline MomentSpec moment_spec(const Common& c) {
    MomentSpec s{parse_number(c.mu, "mu"), parse_number(c.sigma, "sigma"), parse_class(c.cls)};
    if (s.sigma < 0.0) throw input_error("sigma must be nonnegative");
    return s;
}

inline BoundResult compute(const GlueVaRParams& g, const MomentSpec& spec, Direction dir, bool closed) {
    if (closed) return gluevar_closed_form(g, spec, dir);
    return extreme_generic(make_gluevar(g), spec, dir);
}

inline void add_common(CLI::App* sub, Common& c, bool with_direction = true) {
    sub->add_option("--measure", c.measure, "gluevar:a,b,h1,h2 | var:a | tvar:a | rvar:a,b")->required();
    sub->add_option("--mu", c.mu, "mean");
    sub->add_option("--sigma", c.sigma, "standard deviation");
    sub->add_option("--class", c.cls, "general | symmetric");
    if (with_direction) sub->add_option("--direction", c.direction, "worst | best | both");
    sub->add_option("--engine", c.engine, "closed | generic");
}

inline bool closed_engine(const Common& c) {
    if (c.engine == "closed") return true;
    if (c.engine == "generic") return false;
    throw input_error("engine must be closed or generic");
}

inline int cmd_bound(const Common& c, std::optional<std::size_t> oracle_n, std::ostream& out) {
    GlueVaRParams g = parse_measure(c.measure);
    MomentSpec spec = moment_spec(c);
    bool closed = closed_engine(c);
    json docs = json::array();
    for (Direction dir : parse_directions(c.direction)) {
        BoundResult r = compute(g, spec, dir, closed);
        json j = result_json(r);
        j["measure"] = c.measure;
        j["params"] = params_json(g);
        j["mu"] = spec.mu;
        j["sigma"] = spec.sigma;
        j["engine"] = c.engine;
        auto d = make_gluevar(g);
        j["generic_value"] = extreme_generic(d, spec, dir).value;
        if (oracle_n) {
            OracleResult o = oracle_extreme(d, spec, dir, *oracle_n);
            j["oracle_value"] = o.value;
            j["oracle_unresolved"] = o.unresolved;
        }
        docs.push_back(std::move(j));
    }
    out << (docs.size() == 1 ? docs[0] : docs).dump(2) << "\n";
    return ok;
}

inline int cmd_extremal(const Common& c, const std::string& path, std::ostream& out, std::ostream& err) {
    GlueVaRParams g = parse_measure(c.measure);
    MomentSpec spec = moment_spec(c);
    auto dirs = parse_directions(c.direction);
    if (dirs.size() != 1) throw input_error("extremal needs --direction worst or best");
    BoundResult r = compute(g, spec, dirs[0], closed_engine(c));
    if (!r.witness) {
        json j{{"error", "no attaining witness"},
               {"kind", "no_witness"},
               {"case", to_string(r.case_id.label)},
               {"attainment", to_string(r.attainment)},
               {"attained_by_any", r.attained_by_any},
               {"value", r.value}};
        err << j.dump() << "\n";
        return no_witness;
    }
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw input_error("cannot write " + path);
    csv << "cum_prob,value\n";
    for (const auto& a : r.witness->atoms()) csv << fmt17(a.level) << "," << fmt17(a.value) << "\n";
    Moments m = moments(*r.witness);
    json side{{"measure", c.measure},
              {"case", to_string(r.case_id.label)},
              {"value", r.value},
              {"choquet_value", choquet_eval(make_gluevar(g), *r.witness)},
              {"mean", m.mean},
              {"variance", m.variance},
              {"moment_residual", r.moment_residual},
              {"attainment_residual", r.attainment_residual}};
    std::ofstream(path + ".json", std::ios::binary) << side.dump(2) << "\n";
    out << side.dump(2) << "\n";
    return ok;
}

struct VerifyConfig {
    std::size_t tuples = 10000;
    std::size_t oracle_n = 2000;
    std::size_t samples = 100;
    std::uint64_t seed = 1;
    std::string cls = "general";
    std::string direction = "both";
    std::string grid = "random";
    int decimals = 3;
    double corrupt = 0.0;
    unsigned threads = 0;
};

inline GlueVaRParams random_params(std::mt19937_64& rng, int decimals) {
    const double step = std::pow(10.0, -decimals);
    const long long units = std::llround(1.0 / step);
    std::uniform_int_distribution<long long> pick(1, units - 1);
    std::uniform_int_distribution<long long> frac(0, units);
    auto q = [&](long long k) { return static_cast<double>(k) / static_cast<double>(units); };
    long long a = pick(rng), b = pick(rng);
    if (a > b) std::swap(a, b);
    long long h1 = frac(rng), h2 = frac(rng);
    if (h1 > h2) std::swap(h1, h2);
    if (a == b) h2 = h1;
    return {q(a), q(b), q(h1), q(h2)};
}

inline json report_json(const VerifyReport& r) {
    json j;
    j["params"] = params_json(r.params);
    j["mu"] = r.spec.mu;
    j["sigma"] = r.spec.sigma;
    j["class"] = to_string(r.spec.cls);
    j["direction"] = to_string(r.direction);
    j["case"] = r.case_id ? json(to_string(r.case_id->label)) : json(nullptr);
    j["closed_form"] = r.closed_form ? json(*r.closed_form) : json(nullptr);
    j["generic"] = r.generic;
    if (r.sharp) j["sharp"] = *r.sharp;
    j["oracle"] = r.oracle;
    j["oracle_unresolved"] = r.oracle_unresolved;
    j["sample_extreme"] = r.sample_extreme;
    j["moment_residual"] = r.moment_residual;
    j["attainment_residual"] = r.attainment_residual;
    j["checks"] = {{"closed_vs_generic", r.closed_vs_generic_ok},
                   {"oracle_gap", r.oracle_ok},
                   {"samples", r.samples_ok},
                   {"witness", r.witness_ok}};
    return j;
}

inline int cmd_verify(const VerifyConfig& cfg, std::ostream& out) {
    DistClass cls = parse_class(cfg.cls);
    auto dirs = parse_directions(cfg.direction);
    if (cfg.decimals < 1 || cfg.decimals > 9) throw input_error("decimals must be in [1,9]");
    if (cfg.oracle_n < 2) throw input_error("oracle-n must be at least 2");
    struct Task {
        GlueVaRParams g;
        MomentSpec spec;
        Direction dir;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    json tails = json::array();
    bool tails_ok = true;
    if (cfg.grid == "tails") {
        MomentSpec spec{0.0, 1.0, DistClass::general};
        for (double a : {0.5, 0.9, 0.95, 0.99}) {
            double b = 0.5 * (1.0 + a);
            double var = gluevar_worst_general({a, a, 0.0, 0.0}, spec).value;
            double tvar = gluevar_worst_general({a, a, 1.0, 1.0}, spec).value;
            double rvar = gluevar_worst_general({a, b, 0.0, 1.0}, spec).value;
            double formula = std::sqrt(a / (1.0 - a));
            bool eq = std::abs(var - formula) <= 1e-12 && std::abs(tvar - formula) <= 1e-12 &&
                      std::abs(rvar - formula) <= 1e-12;
            tails_ok = tails_ok && eq;
            tails.push_back({{"alpha", a}, {"var", var}, {"tvar", tvar}, {"rvar", rvar},
                              {"formula", formula}, {"equal", eq}});
            for (GlueVaRParams g : {GlueVaRParams{a, a, 0.0, 0.0}, GlueVaRParams{a, a, 1.0, 1.0},
                                    GlueVaRParams{a, b, 0.0, 1.0}})
                tasks.push_back({g, spec, Direction::worst, cfg.seed + tasks.size()});
        }
    } else if (cfg.grid == "random") {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_int_distribution<int> mu_pick(-200, 200), sigma_pick(1, 300);
        for (std::size_t i = 0; i < cfg.tuples; ++i) {
            GlueVaRParams g = random_params(rng, cfg.decimals);
            MomentSpec spec{mu_pick(rng) / 100.0, sigma_pick(rng) / 100.0, cls};
            std::uint64_t s = rng();
            for (Direction d : dirs) tasks.push_back({g, spec, d, s});
        }
    } else {
        throw input_error("grid must be random or tails");
    }
    std::vector<VerifyReport> reports(tasks.size());
    parallel_for(tasks.size(), cfg.threads ? cfg.threads : default_threads(), [&](std::size_t i) {
        VerifyOptions opt{cfg.oracle_n, cfg.samples, tasks[i].seed, cfg.corrupt};
        reports[i] = verify_bound(tasks[i].g, tasks[i].spec, tasks[i].dir, opt);
    });
    std::size_t passed = 0;
    json failing = json::array();
    json counts{{"closed_vs_generic", 0}, {"oracle_gap", 0}, {"samples", 0}, {"witness", 0}};
    double worst_cg = 0, worst_gap = 0, worst_excess = 0, worst_mom = 0, worst_att = 0;
    for (const auto& r : reports) {
        double scale = detail::scale(r.spec);
        double ref = r.closed_form ? *r.closed_form : r.generic;
        if (r.closed_form) worst_cg = std::max(worst_cg, std::abs(*r.closed_form - r.generic) / scale);
        worst_gap = std::max(worst_gap, std::abs(r.oracle - ref) / scale);
        double excess = r.direction == Direction::worst ? r.sample_extreme - ref : ref - r.sample_extreme;
        worst_excess = std::max(worst_excess, excess / scale);
        worst_mom = std::max(worst_mom, r.moment_residual);
        worst_att = std::max(worst_att, r.attainment_residual);
        if (!r.closed_vs_generic_ok) counts["closed_vs_generic"] = counts["closed_vs_generic"].get<int>() + 1;
        if (!r.oracle_ok) counts["oracle_gap"] = counts["oracle_gap"].get<int>() + 1;
        if (!r.samples_ok) counts["samples"] = counts["samples"].get<int>() + 1;
        if (!r.witness_ok) counts["witness"] = counts["witness"].get<int>() + 1;
        if (r.passed()) ++passed;
        else failing.push_back(report_json(r));
    }
    bool all = passed == reports.size() && tails_ok;
    json doc{{"grid", cfg.grid},
             {"class", cfg.cls},
             {"direction", cfg.direction},
             {"seed", cfg.seed},
             {"oracle_n", cfg.oracle_n},
             {"samples", cfg.samples},
             {"decimals", cfg.decimals},
             {"checks_run", reports.size()},
             {"passed", passed},
             {"failed", reports.size() - passed},
             {"failures_by_check", counts},
             {"worst_residuals",
              {{"closed_vs_generic", worst_cg},
               {"oracle_gap", worst_gap},
               {"sample_excess", worst_excess},
               {"moment", worst_mom},
               {"attainment", worst_att}}},
             {"failing", failing},
             {"ok", all}};
    if (!tails.empty()) doc["var_tvar_rvar"] = tails;
    out << doc.dump(2) << "\n";
    return all ? ok : verification_failed;
}

struct SweepConfig {
    std::string axis;
    std::string from, to;
    std::size_t steps = 11;
    std::string out;
    unsigned threads = 0;
};

inline int cmd_sweep(const Common& c, const SweepConfig& s, std::ostream& out) {
    GlueVaRParams base = parse_measure(c.measure);
    MomentSpec spec = moment_spec(c);
    double lo = parse_number(s.from, "from"), hi = parse_number(s.to, "to");
    if (s.steps < 2) throw input_error("steps must be at least 2");
    static const std::vector<std::string> axes{"alpha", "beta", "h1", "h2", "mu", "sigma"};
    if (std::find(axes.begin(), axes.end(), s.axis) == axes.end()) throw input_error("unknown axis '" + s.axis + "'");
    struct Cell {
        double x;
        GlueVaRParams g;
        MomentSpec spec;
    };
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < s.steps; ++i) {
        double x = i + 1 == s.steps ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(s.steps - 1);
        Cell cell{x, base, spec};
        if (s.axis == "alpha") cell.g.alpha = x;
        else if (s.axis == "beta") cell.g.beta = x;
        else if (s.axis == "h1") cell.g.h1 = x;
        else if (s.axis == "h2") cell.g.h2 = x;
        else if (s.axis == "mu") cell.spec.mu = x;
        else cell.spec.sigma = x;
        if (cell.g.alpha == cell.g.beta && cell.g.h1 != cell.g.h2) {
            if (base.alpha == base.beta) cell.g.h1 = cell.g.h2 = x;
        }
        try {
            cell.g.validate();
            cell.spec.validate();
        } catch (const parameter_error& e) {
            throw input_error("sweep leaves the valid region at " + s.axis + " = " + fmt17(x) + ": " + e.what());
        }
        cells.push_back(cell);
    }
    std::vector<std::string> rows(cells.size());
    parallel_for(cells.size(), s.threads ? s.threads : default_threads(), [&](std::size_t i) {
        const Cell& cell = cells[i];
        MomentSpec gen = cell.spec, sym = cell.spec;
        gen.cls = DistClass::general;
        sym.cls = DistClass::symmetric;
        bool closed = symmetric_regime(cell.g.alpha, cell.g.beta) != Regime::straddles_half;
        auto d = make_gluevar(cell.g);
        BoundResult ws = closed ? gluevar_worst_symmetric(cell.g, sym) : extreme_generic(d, sym, Direction::worst);
        BoundResult bs = closed ? gluevar_best_symmetric(cell.g, sym) : extreme_generic(d, sym, Direction::best);
        std::ostringstream row;
        row << fmt17(cell.x) << "," << fmt17(gluevar_worst_general(cell.g, gen).value) << "," << fmt17(ws.value)
            << "," << fmt17(gluevar_best_general(cell.g, gen).value) << "," << fmt17(bs.value) << ","
            << (closed ? "closed" : "generic") << "," << fmt17(*ws.sharp_value) << "," << fmt17(*bs.sharp_value);
        rows[i] = row.str();
    });
    std::ofstream csv(s.out, std::ios::binary);
    if (!csv) throw input_error("cannot write " + s.out);
    csv << "axis_value,worst_general,worst_symmetric,best_general,best_symmetric,regime,"
           "worst_symmetric_sharp,best_symmetric_sharp\n";
    for (const auto& r : rows) csv << r << "\n";
    out << json{{"out", s.out}, {"rows", rows.size()}, {"axis", s.axis}}.dump() << "\n";
    return ok;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Worst- and best-case GlueVaR bounds under mean and variance constraints"};
    app.require_subcommand(1);

    Common bound_c;
    std::optional<std::size_t> oracle_n;
    auto* bound = app.add_subcommand("bound", "compute a bound");
    add_common(bound, bound_c);
    bound->add_option("--oracle-n", oracle_n, "also run the discretized oracle with this many atoms");
    std::string seed_unused;
    bound->add_option("--seed", seed_unused, "accepted for symmetry with verify; bounds are deterministic");

    Common ext_c;
    std::string ext_out;
    auto* extremal = app.add_subcommand("extremal", "write the attaining distribution as CSV");
    add_common(extremal, ext_c);
    extremal->add_option("--out", ext_out, "CSV path")->required();

    VerifyConfig vc;
    auto* verify = app.add_subcommand("verify", "cross-check closed forms, generic engine, oracle and samples");
    verify->add_option("--tuples", vc.tuples);
    verify->add_option("--oracle-n", vc.oracle_n);
    verify->add_option("--samples", vc.samples);
    verify->add_option("--seed", vc.seed);
    verify->add_option("--class", vc.cls);
    verify->add_option("--direction", vc.direction);
    verify->add_option("--grid", vc.grid, "random | tails");
    verify->add_option("--decimals", vc.decimals, "decimal places of the random parameters");
    verify->add_option("--threads", vc.threads);
    verify->add_option("--corrupt-closed-form", vc.corrupt, "test hook: offset added to every closed form")
        ->group("");

    Common sweep_c;
    SweepConfig sc;
    auto* sweep = app.add_subcommand("sweep", "tabulate bounds along one parameter");
    add_common(sweep, sweep_c, false);
    sweep->add_option("--axis", sc.axis, "alpha | beta | h1 | h2 | mu | sigma")->required();
    sweep->add_option("--from", sc.from)->required();
    sweep->add_option("--to", sc.to)->required();
    sweep->add_option("--steps", sc.steps);
    sweep->add_option("--out", sc.out)->required();
    sweep->add_option("--threads", sc.threads);

    auto fail = [&](int code, const std::string& kind, const std::string& msg) {
        err << json{{"error", msg}, {"kind", kind}}.dump() << "\n";
        return code;
    };
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        return fail(invalid_input, "invalid_input", e.what());
    }
    try {
        if (*bound) return cmd_bound(bound_c, oracle_n, out);
        if (*extremal) return cmd_extremal(ext_c, ext_out, out, err);
        if (*verify) return cmd_verify(vc, out);
        return cmd_sweep(sweep_c, sc, out);
    } catch (const input_error& e) {
        return fail(invalid_input, "invalid_input", e.what());
    } catch (const parameter_error& e) {
        return fail(invalid_input, "invalid_input", e.what());
    } catch (const unsupported_regime_error& e) {
        return fail(unsupported_regime, "unsupported_regime", e.what());
    }
}

}  // namespace gluevar::cli
