// concentra: batch front end for the risk, concentration, frontier, copula
// and collapse operations. Exit codes: 0 ok, 1 negative verdict, 2 input
// error, 3 solver failure.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "concentra/concentra.hpp"

using namespace concentra;

namespace {

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kInputError = 2;
constexpr int kSolverError = 3;
constexpr int kConfigVersion = 1;

struct Common {
    std::uint64_t seed = 0;
    std::optional<double> p;
    double eps = 1e-6;
    std::string config;
    std::string out;
};

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path);
    f << text;
}

std::string dump(const Json& j) { return dump_json(j) + "\n"; }

Json load_config(const std::string& path) {
    if (path.empty()) return Json::object();
    Json j = parse_json(read_text(path), path);
    if (!j.is_object()) throw InputError(path + ": config must be a JSON object");
    if (j.contains("version") && (!j["version"].is_number_integer() || j["version"].get<int>() != kConfigVersion)) {
        throw InputError(path + ": unsupported config version (expected " + std::to_string(kConfigVersion) + ")");
    }
    return j;
}

double level_from(const Common& c, const Json& cfg, double fallback) {
    double p = fallback;
    if (cfg.contains("p")) {
        if (!cfg["p"].is_number()) throw InputError("config p must be a number");
        p = cfg["p"].get<double>();
    }
    if (c.p) p = *c.p;
    require_level(p);
    return p;
}

// Measure grammar: var, es, lower_es, mean, mix:<alpha>, dev-linear:<c>, dev-cap:<c>.
RiskFunctional parse_measure(const std::string& text, double p) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    auto arg = [&]() {
        if (colon == std::string::npos) throw InputError("measure '" + text + "' needs a parameter");
        try {
            return std::stod(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw InputError("measure '" + text + "' has a malformed parameter");
        }
    };
    if (name == "var") return RiskFunctional::value_at_risk(p);
    if (name == "es") return RiskFunctional::expected_shortfall(p);
    if (name == "lower_es") return RiskFunctional::lower_expected_shortfall(p);
    if (name == "mean") return RiskFunctional::mean();
    if (name == "mix") return RiskFunctional::coherent_mix(p, arg());
    if (name == "dev-linear") {
        const double c = arg();
        return RiskFunctional::deviation_transform(p, [c](double x) { return c * x; });
    }
    if (name == "dev-cap") {
        const double c = arg();
        return RiskFunctional::deviation_transform(p, [c](double x) { return std::min(x, c); });
    }
    throw InputError("unknown measure '" + text + "'");
}

Json measure_row(const std::string& label, const DiscreteDistribution& d, double p,
                 const std::optional<RiskFunctional>& extra) {
    Json row{{"label", label},
             {"var", json_number(value_at_risk(d, p))},
             {"es", json_number(expected_shortfall(d, p))},
             {"lower_es", json_number(lower_expected_shortfall(d, p))},
             {"mean", json_number(d.mean())}};
    if (extra) row["measure"] = json_number((*extra)(d));
    return row;
}

std::string risk_text(const Json& report) {
    std::vector<std::string> cols{"label", "var", "es", "lower_es", "mean"};
    if (report["sum"].contains("measure")) cols.push_back("measure");
    std::vector<std::vector<std::string>> cells;
    cells.push_back(cols);
    auto add = [&](const Json& row) {
        std::vector<std::string> line;
        for (const auto& c : cols) {
            line.push_back(row[c].is_string() ? row[c].get<std::string>() : format_number(row[c].get<double>()));
        }
        cells.push_back(std::move(line));
    };
    for (const auto& row : report["positions"]) add(row);
    add(report["sum"]);
    std::vector<std::size_t> width(cols.size(), 0);
    for (const auto& line : cells)
        for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
    std::ostringstream os;
    os << "p = " << format_number(report["p"].get<double>()) << "\n";
    os << "weights: " << report["weights"].get<std::string>() << "\n";
    if (report.contains("measure")) os << "measure: " << report["measure"].get<std::string>() << "\n";
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (i == 0) os << std::left << std::setw(static_cast<int>(width[i])) << line[i];
            else os << "  " << std::right << std::setw(static_cast<int>(width[i])) << line[i];
        }
        os << "\n";
    }
    if (report.contains("axioms")) {
        for (const auto& a : report["axioms"]) {
            os << "axiom " << a["axiom"].get<std::string>() << ": " << a["result"].get<std::string>() << " ("
               << a["trials"].get<std::size_t>() << " trials)\n";
        }
    }
    return os.str();
}

int cmd_risk(const Common& c, const std::string& input, const std::string& format, const std::string& measure,
             std::size_t trials, const std::vector<std::string>& axioms) {
    const Json cfg = load_config(c.config);
    const double p = level_from(c, cfg, 0.95);
    const auto loaded = parse_scenarios_csv(read_text(input));
    const auto& s = loaded.set;
    std::optional<RiskFunctional> rf;
    if (!measure.empty()) rf = parse_measure(measure, p);
    Json report{{"operation", "risk"}, {"p", json_number(p)}};
    report["weights"] = loaded.weights_defaulted ? "equal (no weight column)" : "from weight column";
    if (rf) report["measure"] = rf->name();
    Json positions = Json::array();
    for (std::size_t j = 0; j < s.positions(); ++j) positions.push_back(measure_row(s.labels()[j], s.marginal(j), p, rf));
    report["positions"] = positions;
    report["sum"] = measure_row("sum", s.total(), p, rf);
    bool all_passed = true;
    if (!axioms.empty()) {
        if (!rf) throw InputError("--axioms needs --measure");
        Json reports = Json::array();
        HarnessOptions opt;
        opt.threads = default_threads();
        for (std::size_t i = 0; i < axioms.size(); ++i) {
            const auto a = axiom_from_string(axioms[i]);
            if (!a) throw InputError("unknown axiom '" + axioms[i] + "'");
            const auto r = axiom_harness(*rf, *a, trials, mix_seed(c.seed, i), opt);
            all_passed = all_passed && r.passed;
            reports.push_back(to_json(r));
        }
        report["axioms"] = reports;
    }
    if (format == "text") emit(risk_text(report), c.out);
    else if (format == "json") emit(dump(report), c.out);
    else throw InputError("unknown format '" + format + "'");
    return all_passed ? kOk : kNegative;
}

int cmd_concentration(const Common& c, const std::string& input) {
    const Json cfg = load_config(c.config);
    const double p = level_from(c, cfg, 0.95);
    const auto loaded = parse_scenarios_csv(read_text(input));
    const auto& s = loaded.set;
    const auto search = find_common_tail_event(s, p);
    Json report{{"operation", "concentration"}, {"p", json_number(p)}};
    report["weights"] = loaded.weights_defaulted ? "equal (no weight column)" : "from weight column";
    report["verdict"] = to_string(search.verdict);
    if (search.certificate) report["certificate"] = to_json(*search.certificate);
    if (!search.reason.empty()) report["reason"] = search.reason;
    report["es_gap"] = json_number(es_additivity_gap(s, p));
    report["es_additive"] = es_additivity_test(s, p);
    emit(dump(report), c.out);
    return search.verdict == TailVerdict::Certified ? kOk : kNegative;
}

FeasibleSet feasible_from(const Json& cons, std::size_t k) {
    if (cons.is_null()) return FeasibleSet::simplex();
    if (!cons.is_object() || !cons.contains("type") || !cons["type"].is_string()) {
        throw InputError("constraints must be an object with a type");
    }
    const auto type = cons["type"].get<std::string>();
    auto vec = [&](const char* key) {
        if (!cons.contains(key) || !cons[key].is_array()) throw InputError(std::string("constraints need array ") + key);
        std::vector<double> v;
        for (const auto& x : cons[key]) {
            if (!x.is_number()) throw InputError(std::string("constraints ") + key + " must be numeric");
            v.push_back(x.get<double>());
        }
        return v;
    };
    if (type == "simplex") return FeasibleSet::simplex();
    if (type == "box") {
        auto lo = vec("lo");
        auto hi = vec("hi");
        if (lo.size() != k || hi.size() != k) throw InputError("box bounds need one entry per asset");
        return FeasibleSet::box(std::move(lo), std::move(hi));
    }
    if (type == "linear") {
        if (!cons.contains("G") || !cons["G"].is_array()) throw InputError("linear constraints need matrix G");
        std::vector<std::vector<double>> G;
        for (const auto& row : cons["G"]) {
            std::vector<double> r;
            for (const auto& x : row) {
                if (!x.is_number()) throw InputError("G entries must be numeric");
                r.push_back(x.get<double>());
            }
            G.push_back(std::move(r));
        }
        return FeasibleSet::linear(std::move(G), vec("h"));
    }
    throw InputError("unknown constraint type '" + type + "'");
}

int cmd_frontier(const Common& c, const std::string& input) {
    const Json cfg = load_config(c.config);
    const double p = level_from(c, cfg, 0.95);
    const auto loaded = parse_scenarios_csv(read_text(input));
    const std::size_t k = loaded.set.positions();
    PortfolioProblem prob{loaded.set, p, feasible_from(cfg.value("constraints", Json()), k),
                          PortfolioMode::MinEsGivenReturn, 0.0};
    const std::string mode = cfg.value("mode", std::string("min_es"));
    if (mode == "max_return") prob.mode = PortfolioMode::MaxReturnGivenEs;
    else if (mode != "min_es") throw InputError("mode must be min_es or max_return");
    const Json np = cfg.value("n_points", Json(11));
    if (!np.is_number_integer() || np.get<long long>() < 2) throw InputError("n_points must be an integer >= 2");
    const auto points = frontier(prob, np.get<std::size_t>());
    std::ostringstream os;
    os << "target,es,mean";
    for (std::size_t j = 0; j < k; ++j) os << ",w_" << (j + 1);
    os << "\n";
    std::size_t written = 0;
    for (const auto& pt : points) {
        if (pt.solution.status != LpStatus::Optimal) {
            std::cerr << "frontier point at target " << format_number(pt.target) << ": "
                      << to_string(pt.solution.status) << "\n";
            continue;
        }
        os << format_number(pt.target) << "," << format_number(pt.solution.es_value) << ","
           << format_number(pt.solution.mean_return);
        for (double w : pt.solution.weights) os << "," << format_number(w);
        os << "\n";
        ++written;
    }
    if (written == 0) throw SolverError("no frontier point could be solved");
    emit(os.str(), c.out);
    return kOk;
}

CheckerboardCopula load_copula(const std::string& path) { return copula_from_json(parse_json(read_text(path), path)); }

int cmd_copula_check(const Common& c, const std::string& input) {
    const Json cfg = load_config(c.config);
    const double p = level_from(c, cfg, 0.5);
    const auto cop = load_copula(input);
    const bool dp = in_dp(cop, p);
    Json report{{"operation", "check-dp"}, {"n", cop.n()}, {"p", json_number(p)}};
    report["c_pp"] = json_number(eval_c(cop, p, p));
    report["in_dp"] = dp;
    try {
        const auto tc = tail_curves(cop, p);
        report["tail_curves"] = Json{{"t", json_number(tc.t)}, {"s", json_number(tc.s)}};
    } catch (const GridError&) {
        report["tail_curves"] = nullptr;
    }
    emit(dump(report), c.out);
    return dp ? kOk : kNegative;
}

int cmd_copula_densify(const Common& c, const std::string& input) {
    const auto cop = load_copula(input);
    emit(dump(to_json(densify(cop))), c.out);
    return kOk;
}

int cmd_copula_simulate(const Common& c, const std::string& input, std::size_t length, std::size_t reps,
                        const std::string& means_out) {
    const Json cfg = load_config(c.config);
    std::optional<double> tail;
    if (cfg.contains("p") || c.p) tail = level_from(c, cfg, 0.5);
    DiagnosticThresholds th;
    th.band_sigmas = cfg.value("band_sigmas", th.band_sigmas);
    th.floor = cfg.value("floor", th.floor);
    th.quantile = cfg.value("quantile", th.quantile);
    if (!(th.band_sigmas > 0.0) || !(th.floor > 0.0) || !(th.quantile > 0.0 && th.quantile < 1.0)) {
        throw InputError("diagnostic thresholds must be positive and the quantile in (0,1)");
    }
    length = cfg.value("length", length);
    reps = cfg.value("replications", reps);
    const auto cop = load_copula(input);
    const auto diag = lln_diagnostic(cop, length, reps, tail, c.seed, th);
    Json report{{"operation", "simulate"}, {"n", cop.n()}, {"seed", c.seed}};
    report.update(to_json(diag));
    emit(dump(report), c.out);
    if (!means_out.empty()) emit(partial_means_csv(diag), means_out);
    return diag.verdict == Diversification::NonDiversifiable ? kNegative : kOk;
}

int cmd_collapse(const Common& c, const std::string& input) {
    const Json cfg = load_config(c.config);
    const double p = level_from(c, cfg, 0.95);
    double eps = c.eps;
    if (!(eps > 0.0)) throw InputError("--eps must be positive");
    const auto d = parse_distribution_csv(read_text(input));
    emit(dump(to_json(collapse(d, p, eps), p, eps)), c.out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"concentra: ES-based risk, concentration and diversification tools"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "random seed");
        sub->add_option("--p", common.p, "confidence level in (0,1)");
        sub->add_option("--eps", common.eps, "width tolerance");
        sub->add_option("--config", common.config, "JSON config file");
        sub->add_option("--out", common.out, "output path (default stdout)");
    };

    std::string input, format = "json", measure, means_out;
    std::size_t trials = 1000, length = 10000, reps = 100;
    std::vector<std::string> axioms;

    auto* risk = app.add_subcommand("risk", "VaR/ES/lower ES/mean per position and for the sum");
    add_common(risk);
    risk->add_option("scenarios", input, "scenario CSV")->required();
    risk->add_option("--format", format, "json or text");
    risk->add_option("--measure", measure, "var, es, lower_es, mean, mix:<a>, dev-linear:<c>, dev-cap:<c>");
    risk->add_option("--axioms", axioms, "axioms to test on the measure: M TI PH Convexity SSD pCA")->delimiter(',');
    risk->add_option("--trials", trials, "harness trials per axiom");

    auto* conc = app.add_subcommand("concentration", "common tail event search and ES additivity");
    add_common(conc);
    conc->add_option("scenarios", input, "scenario CSV")->required();

    auto* front = app.add_subcommand("frontier", "mean-ES frontier as CSV");
    add_common(front);
    front->add_option("scenarios", input, "scenario CSV")->required();

    auto* cop = app.add_subcommand("copula", "checkerboard copula operations");
    cop->require_subcommand(1);
    auto* check = cop->add_subcommand("check-dp", "C(p,p) = p test and tail curves");
    auto* dens = cop->add_subcommand("densify", "concordance-increasing densification");
    auto* sim = cop->add_subcommand("simulate", "Markov-chain law of large numbers diagnostic");
    for (auto* sub : {check, dens, sim}) {
        add_common(sub);
        sub->add_option("copula", input, "copula JSON")->required();
    }
    sim->add_option("--length", length, "chain length N");
    sim->add_option("--replications", reps, "replications R");
    sim->add_option("--means-out", means_out, "partial-means CSV path");

    auto* coll = app.add_subcommand("collapse", "iterate toward the two-point ES/lower-ES law");
    add_common(coll);
    coll->add_option("distribution", input, "value,prob CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    try {
        if (*risk) return cmd_risk(common, input, format, measure, trials, axioms);
        if (*conc) return cmd_concentration(common, input);
        if (*front) return cmd_frontier(common, input);
        if (*check) return cmd_copula_check(common, input);
        if (*dens) return cmd_copula_densify(common, input);
        if (*sim) return cmd_copula_simulate(common, input, length, reps, means_out);
        if (*coll) return cmd_collapse(common, input);
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kSolverError;
    } catch (const std::invalid_argument& e) {  // InputError, GridError
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::domain_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const Json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
