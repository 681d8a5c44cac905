#include "cayley/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "cayley/classifier.hpp"
#include "cayley/criticality.hpp"
#include "cayley/exact_oracle.hpp"
#include "cayley/perturbation.hpp"
#include "cayley/recursion.hpp"

namespace cayley::cli {

using ojson = nlohmann::ordered_json;

namespace {

struct CommandName {
    Command command;
    const char* name;
};

constexpr CommandName kCommands[] = {
    {Command::Critical, "critical"},   {Command::Classify, "classify"},
    {Command::SweepGamma, "sweep-gamma"}, {Command::Iterate, "iterate"},
    {Command::ConditionSum, "condition-sum"}, {Command::Verify, "verify"},
};

const char* to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::None: return "none";
        case ProfileKind::PowerLaw: return "power-law";
        case ProfileKind::Geometric: return "geometric";
        case ProfileKind::File: return "file";
    }
    return "?";
}

ProfileKind profile_kind_from_string(const std::string& s) {
    for (ProfileKind k : {ProfileKind::None, ProfileKind::PowerLaw, ProfileKind::Geometric, ProfileKind::File})
        if (s == to_string(k)) return k;
    throw DomainError("unknown profile kind '" + s + "'");
}

}  // namespace

const char* to_string(Command c) {
    for (const auto& entry : kCommands)
        if (entry.command == c) return entry.name;
    return "?";
}

Command command_from_string(const std::string& name) {
    for (const auto& entry : kCommands)
        if (name == entry.name) return entry.command;
    throw DomainError("unknown command '" + name + "'");
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_number(const std::string& text) {
    if (text == "inf" || text == "+inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    if (text == "nan") return NAN;
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw DomainError("not a number: '" + text + "'");
    }
    if (used != text.size()) throw DomainError("not a number: '" + text + "'");
    return value;
}

namespace {

ojson number(double x) { return format_number(x); }

ojson optional_number(const std::optional<double>& x) { return x ? number(*x) : ojson(nullptr); }

template <class T>
ojson number_list(const std::vector<T>& xs) {
    ojson a = ojson::array();
    for (T x : xs) {
        if constexpr (std::is_floating_point_v<T>) a.push_back(number(x));
        else a.push_back(x);
    }
    return a;
}

std::vector<double> read_numbers(const nlohmann::json& a) {
    std::vector<double> out;
    for (const auto& x : a) out.push_back(parse_number(x.get<std::string>()));
    return out;
}

template <class T>
std::vector<T> read_ints(const nlohmann::json& a) {
    std::vector<T> out;
    for (const auto& x : a) out.push_back(x.get<T>());
    return out;
}

}  // namespace

ojson config_to_json(const RunConfig& c) {
    ojson profile;
    profile["kind"] = to_string(c.profile.kind);
    switch (c.profile.kind) {
        case ProfileKind::None: break;
        case ProfileKind::PowerLaw: profile["gamma"] = number(c.profile.gamma); break;
        case ProfileKind::Geometric:
            profile["ratio"] = number(c.profile.ratio);
            profile["amplitude"] = number(c.profile.amplitude);
            break;
        case ProfileKind::File:
            profile["path"] = c.profile.path;
            profile["values"] = number_list(c.profile.values);
            break;
    }
    ojson j;
    j["command"] = to_string(c.command);
    j["d"] = c.d;
    j["J"] = number(c.J);
    j["beta"] = optional_number(c.beta);
    j["theta"] = optional_number(c.theta);
    j["profile"] = profile;
    j["h"] = c.h;
    j["depths"] = number_list(c.depths);
    j["probes"] = number_list(c.probes);
    j["tau_gap"] = number(c.tau_gap);
    j["tau_uniq"] = number(c.tau_uniq);
    j["gammas"] = number_list(c.gammas);
    j["seed_b"] = c.seed_b;
    j["from"] = c.from;
    j["to"] = c.to;
    j["horizon"] = c.horizon;
    j["verify_d"] = number_list(c.verify_d);
    j["verify_depths"] = number_list(c.verify_depths);
    j["verify_betas"] = number_list(c.verify_betas);
    j["verify_boundaries"] = number_list(c.verify_boundaries);
    j["format"] = c.format == OutputFormat::Json ? "json" : "csv";
    return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    c.command = command_from_string(j.at("command").get<std::string>());
    c.d = j.at("d").get<int>();
    c.J = parse_number(j.at("J").get<std::string>());
    if (!j.at("beta").is_null()) c.beta = parse_number(j.at("beta").get<std::string>());
    if (!j.at("theta").is_null()) c.theta = parse_number(j.at("theta").get<std::string>());
    const auto& p = j.at("profile");
    c.profile.kind = profile_kind_from_string(p.at("kind").get<std::string>());
    if (p.contains("gamma")) c.profile.gamma = parse_number(p.at("gamma").get<std::string>());
    if (p.contains("ratio")) c.profile.ratio = parse_number(p.at("ratio").get<std::string>());
    if (p.contains("amplitude")) c.profile.amplitude = parse_number(p.at("amplitude").get<std::string>());
    if (p.contains("path")) c.profile.path = p.at("path").get<std::string>();
    if (p.contains("values")) c.profile.values = read_numbers(p.at("values"));
    c.h = j.at("h").get<std::string>();
    c.depths = read_ints<std::int64_t>(j.at("depths"));
    c.probes = read_ints<std::int64_t>(j.at("probes"));
    c.tau_gap = parse_number(j.at("tau_gap").get<std::string>());
    c.tau_uniq = parse_number(j.at("tau_uniq").get<std::string>());
    c.gammas = read_numbers(j.at("gammas"));
    c.seed_b = j.at("seed_b").get<std::string>();
    c.from = j.at("from").get<std::int64_t>();
    c.to = j.at("to").get<std::int64_t>();
    c.horizon = j.at("horizon").get<std::int64_t>();
    c.verify_d = read_ints<int>(j.at("verify_d"));
    c.verify_depths = read_ints<int>(j.at("verify_depths"));
    c.verify_betas = read_numbers(j.at("verify_betas"));
    c.verify_boundaries = read_numbers(j.at("verify_boundaries"));
    c.format = j.at("format").get<std::string>() == "csv" ? OutputFormat::Csv : OutputFormat::Json;
    return c;
}

namespace {

// Results of one command, rendered afterwards as JSON or CSV.
struct Report {
    ojson results = ojson::object();
    ojson diagnostics = ojson::object();
    std::vector<std::string> csv_header;
    std::vector<std::vector<std::string>> csv_rows;
    int exit_code = 0;
};

ModelParams resolve_params(const RunConfig& c) {
    if (c.beta && c.theta) throw DomainError("give exactly one of --beta and --theta");
    if (c.theta) return make_params_from_theta(c.d, c.J, *c.theta);
    if (c.beta) return make_params(c.d, c.J, *c.beta);
    throw DomainError("one of --beta or --theta is required");
}

ojson params_json(const ModelParams& p) {
    ojson j;
    j["d"] = p.d();
    j["J"] = number(p.J());
    j["beta"] = number(p.beta());
    j["theta"] = number(p.theta());
    return j;
}

double resolve_h(const std::string& text, const ModelParams& p) {
    if (text == "auto" || text == "+auto") return critical_field(p);
    if (text == "-auto") return -critical_field(p);
    return parse_number(text);
}

std::optional<EpsilonFamily> epsilon_family(const ProfileSpec& s) {
    switch (s.kind) {
        case ProfileKind::None: return std::nullopt;
        case ProfileKind::PowerLaw: return EpsilonFamily::power_law(s.gamma);
        case ProfileKind::Geometric: return EpsilonFamily::geometric(s.ratio, s.amplitude);
        case ProfileKind::File: return EpsilonFamily::custom(s.values);
    }
    return std::nullopt;
}

FieldProfile resolve_profile(const RunConfig& c, const ModelParams& p) {
    if (auto eps = epsilon_family(c.profile)) return FieldProfile::critical_minus(std::move(*eps));
    return FieldProfile::homogeneous(resolve_h(c.h, p));
}

// One value per non-empty line; '#' starts a comment. Either every value is
// zero (the unperturbed critical field) or they are positive and strictly decreasing.
std::vector<double> read_epsilon_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open epsilon file '" + path + "'");
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        try {
            values.push_back(parse_number(line.substr(first, last - first + 1)));
        } catch (const DomainError&) {
            throw DomainError(path + ":" + std::to_string(line_no) + ": not a number");
        }
    }
    if (values.empty()) throw DomainError("epsilon file '" + path + "' has no values");
    const bool all_zero = std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
    if (!all_zero) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] > 0.0) || !std::isfinite(values[i]))
                throw MonotonicityError("epsilon file value " + std::to_string(i + 1) + " is not positive");
            if (i > 0 && !(values[i] < values[i - 1]))
                throw MonotonicityError("epsilon file values must be strictly decreasing (line value " +
                                        std::to_string(i + 1) + ")");
        }
    }
    return values;
}

// Runs job(i) for i = 0..count-1 on up to `workers` threads. Each job writes to
// its own slot; the first exception is rethrown after all threads finish.
template <class Job>
void run_pool(std::size_t count, int workers, Job&& job) {
    const auto threads = static_cast<std::size_t>(std::clamp<std::int64_t>(workers, 1, std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        job(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

ClassifyOptions classify_options(const RunConfig& c) {
    ClassifyOptions o;
    o.probes = c.probes;
    o.depths = c.depths;
    o.tolerances = {c.tau_gap, c.tau_uniq};
    return o;
}

ojson gap_trace_json(const std::vector<GapSample>& trace) {
    ojson a = ojson::array();
    for (const GapSample& s : trace)
        a.push_back({{"k0", s.k0},
                     {"n", s.n},
                     {"b_plus_tilde", number(s.b_plus)},
                     {"b_minus_tilde", number(s.b_minus)},
                     {"gap", number(s.gap)}});
    return a;
}

ojson condition_report_json(const ConditionSumReport& r) {
    return {{"n", r.n},
            {"S_n", number(r.S_n)},
            {"S_n_identity", number(r.S_n_identity)},
            {"lower", number(r.lower)},
            {"upper", number(r.upper)},
            {"tail_from", r.tail_from},
            {"tail_sum", number(r.tail_sum)}};
}

ojson condition_classification_json(const ConditionClassification& c) {
    return {{"numeric", to_string(c.numeric)},
            {"analytic", c.analytic ? ojson(to_string(*c.analytic)) : ojson(nullptr)},
            {"horizons", number_list(c.horizons)},
            {"sums", number_list(c.sums)},
            {"increment_ratios", number_list(c.increment_ratios)}};
}

ojson verdict_json(const ClassificationVerdict& v) {
    ojson j;
    j["verdict"] = to_string(v.verdict);
    j["reason"] = v.reason;
    ojson probes = ojson::array();
    for (std::size_t i = 0; i < v.probe_verdicts.size(); ++i)
        probes.push_back({{"k0", v.options.probes[i]}, {"verdict", to_string(v.probe_verdicts[i])}});
    j["probe_verdicts"] = probes;
    j["h_c"] = optional_number(v.h_c);
    j["b_plus"] = optional_number(v.b_plus);
    j["b_minus"] = optional_number(v.b_minus);
    j["min_gap"] = number(v.min_gap);
    j["observed_delta_prime"] = optional_number(v.observed_delta_prime);
    j["contraction_rate"] = optional_number(v.contraction_rate);
    j["observed_delta_second"] = optional_number(v.observed_delta_second);
    if (v.condition) {
        j["condition"] = condition_report_json(v.condition->at_max_depth);
        j["condition"]["classification"] = condition_classification_json(v.condition->classification);
    } else {
        j["condition"] = nullptr;
    }
    j["gap_trace"] = gap_trace_json(v.gap_trace);
    return j;
}

Report cmd_critical(const RunConfig& c) {
    const ModelParams p = resolve_params(c);
    const bool subcritical = !(p.d() * p.theta() > 1.0);
    const double h = resolve_h(c.h, p);
    const FixedPointReport fp = fixed_points(h, p);

    Report r;
    r.results["params"] = params_json(p);
    r.results["beta_c"] = number(beta_c(p.d(), p.J()));
    r.results["theta_c"] = number(theta_c(p.d()));
    r.results["subcritical"] = subcritical;
    r.results["h_c"] = subcritical ? ojson(nullptr) : number(critical_field(p));
    r.results["tangency_point"] = subcritical ? ojson(nullptr) : number(tangency_point(p));
    r.results["h"] = number(h);
    r.results["case"] = to_string(fp.case_label);
    ojson points = ojson::array();
    for (const FixedPoint& x : fp.points) {
        points.push_back({{"b", number(x.b)}, {"psi_prime", number(x.psi_prime)}, {"stability", to_string(x.stability)}});
        r.csv_rows.push_back({format_number(x.b), format_number(x.psi_prime), to_string(x.stability)});
    }
    r.results["fixed_points"] = points;
    r.csv_header = {"b", "psi_prime", "stability"};
    if (subcritical) r.diagnostics["notice"] = "subcritical: theta <= 1/d, psi has a single fixed point for every h";
    else r.diagnostics["in_tangency_band"] = in_tangency_band(h, p);
    return r;
}

Report cmd_classify(const RunConfig& c) {
    const ModelParams p = resolve_params(c);
    const FieldProfile profile = resolve_profile(c, p);
    const ClassificationVerdict v = classify(profile, p, classify_options(c));

    Report r;
    r.results["params"] = params_json(p);
    r.results["profile"] = profile.describe();
    r.results["classification"] = verdict_json(v);
    r.csv_header = {"k0", "depth", "b_plus_tilde", "b_minus_tilde", "gap", "verdict"};
    for (const GapSample& s : v.gap_trace)
        r.csv_rows.push_back({std::to_string(s.k0), std::to_string(s.n), format_number(s.b_plus),
                              format_number(s.b_minus), format_number(s.gap), to_string(v.verdict)});
    r.diagnostics["reason"] = v.reason;
    return r;
}

Report cmd_sweep_gamma(const RunConfig& c) {
    if (c.gammas.empty()) throw DomainError("sweep-gamma needs a non-empty --gammas grid");
    const ModelParams p = resolve_params(c);
    const ClassifyOptions options = classify_options(c);
    std::vector<ClassificationVerdict> cells(c.gammas.size());
    run_pool(cells.size(), c.workers, [&](std::size_t i) {
        cells[i] = classify(FieldProfile::critical_minus(EpsilonFamily::power_law(c.gammas[i])), p, options);
    });

    Report r;
    r.results["params"] = params_json(p);
    ojson rows = ojson::array();
    r.csv_header = {"gamma", "k0", "depth", "b_plus_tilde", "b_minus_tilde", "gap", "verdict", "S_n"};
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const ClassificationVerdict& v = cells[i];
        const double S = v.condition ? v.condition->at_max_depth.S_n : NAN;
        ojson final_gaps = ojson::array();
        for (const GapSample& s : v.gap_trace)
            if (s.n == options.depths.back()) final_gaps.push_back({{"k0", s.k0}, {"gap", number(s.gap)}});
        ojson row;
        row["gamma"] = number(c.gammas[i]);
        row["verdict"] = to_string(v.verdict);
        row["reason"] = v.reason;
        row["S_n"] = number(S);
        row["condition_numeric"] = v.condition ? ojson(to_string(v.condition->classification.numeric)) : ojson(nullptr);
        row["condition_analytic"] = v.condition && v.condition->classification.analytic
                                        ? ojson(to_string(*v.condition->classification.analytic))
                                        : ojson(nullptr);
        row["final_gaps"] = final_gaps;
        row["gap_trace"] = gap_trace_json(v.gap_trace);
        rows.push_back(row);
        for (const GapSample& s : v.gap_trace)
            r.csv_rows.push_back({format_number(c.gammas[i]), std::to_string(s.k0), std::to_string(s.n),
                                  format_number(s.b_plus), format_number(s.b_minus), format_number(s.gap),
                                  to_string(v.verdict), format_number(S)});
    }
    r.results["rows"] = rows;
    return r;
}

ExtendedReal resolve_seed(const std::string& text, const ModelParams& p) {
    if (text == "inf" || text == "+inf") return ExtendedReal::plus_infinity();
    if (text == "minus-inf" || text == "-inf") return ExtendedReal::minus_infinity();
    if (text == "plus") return critical_pair(p).b_plus;
    if (text == "minus") return critical_pair(p).b_minus;
    return parse_number(text);
}

std::string seed_text(const ExtendedReal& x) {
    switch (x.kind()) {
        case ExtendedReal::Kind::PlusInfinity: return "inf";
        case ExtendedReal::Kind::MinusInfinity: return "-inf";
        case ExtendedReal::Kind::Finite: break;
    }
    return format_number(x.value());
}

Report cmd_iterate(const RunConfig& c) {
    const ModelParams p = resolve_params(c);
    const FieldProfile profile = resolve_profile(c, p);
    const ExtendedReal seed = resolve_seed(c.seed_b, p);
    const IterationTrace trace = iterate_backward(profile, p, c.from, c.to, seed);

    Report r;
    r.results["params"] = params_json(p);
    r.results["profile"] = profile.describe();
    r.results["seed"] = seed_text(seed);
    ojson values = ojson::array();
    r.csv_header = {"m", "b"};
    for (std::int64_t m = trace.start_depth; m >= trace.end_depth; --m) {
        values.push_back({{"m", m}, {"b", number(trace.at(m))}});
        r.csv_rows.push_back({std::to_string(m), format_number(trace.at(m))});
    }
    r.results["values"] = values;
    r.diagnostics["recursion_residual"] = number(recursion_residual(trace));
    return r;
}

Report cmd_condition_sum(const RunConfig& c) {
    const auto eps = epsilon_family(c.profile);
    if (!eps) throw DomainError("condition-sum needs --gamma, --geom or --epsilon-file");
    if (c.horizon < 1) throw DomainError("--n must be >= 1");
    const ConditionSumReport report = condition_sum(*eps, c.horizon);
    const ConditionClassification cls = classify_condition(*eps);

    Report r;
    r.results["epsilon"] = eps->describe();
    r.results["sum"] = condition_report_json(report);
    r.results["classification"] = condition_classification_json(cls);
    r.csv_header = {"n", "S_n", "S_n_identity", "lower", "upper", "tail_sum"};
    r.csv_rows.push_back({std::to_string(report.n), format_number(report.S_n), format_number(report.S_n_identity),
                          format_number(report.lower), format_number(report.upper), format_number(report.tail_sum)});
    return r;
}

Report cmd_verify(const RunConfig& c) {
    if (c.beta && c.theta) throw DomainError("give exactly one of --beta and --theta");
    const bool explicit_geometry = !c.verify_d.empty() || !c.verify_depths.empty();
    const std::vector<int> ds = c.verify_d.empty() ? std::vector<int>{2, 3} : c.verify_d;
    const std::vector<int> depths = c.verify_depths.empty() ? std::vector<int>{2, 3} : c.verify_depths;
    const std::vector<double> boundaries =
        c.verify_boundaries.empty() ? std::vector<double>{-1.0, 0.0, 0.5, 2.0} : c.verify_boundaries;
    std::vector<double> betas = c.verify_betas;
    if (betas.empty() && c.beta) betas = {*c.beta};
    if (betas.empty() && !c.theta) betas = {0.3, 0.6, 1.2};

    Report r;
    ojson rows = ojson::array();
    ojson skipped = ojson::array();
    double worst = 0.0;
    int failures = 0;
    r.csv_header = {"d", "depth", "beta", "theta", "profile", "b_n", "b_prev", "max_residual", "pass"};
    for (int d : ds) {
        for (int depth : depths) {
            if (TreeGeometry::total_vertices(d, depth) > kVertexCap) {
                if (explicit_geometry)
                    throw SizeError("d = " + std::to_string(d) + ", depth = " + std::to_string(depth) + " has " +
                                    std::to_string(TreeGeometry::total_vertices(d, depth)) +
                                    " vertices; enumeration cap is " + std::to_string(kVertexCap));
                skipped.push_back({{"d", d}, {"depth", depth}, {"reason", "vertex cap"}});
                continue;
            }
            std::vector<ModelParams> params;
            if (c.theta) params.push_back(make_params_from_theta(d, c.J, *c.theta));
            for (double beta : betas) params.push_back(make_params(d, c.J, beta));
            for (const ModelParams& p : params) {
                std::vector<FieldProfile> profiles;
                if (auto eps = epsilon_family(c.profile)) {
                    profiles.push_back(FieldProfile::critical_minus(std::move(*eps)));
                } else {
                    profiles.push_back(FieldProfile::homogeneous(parse_number(c.h)));
                    profiles.push_back(FieldProfile::critical_minus(EpsilonFamily::power_law(2.0)));
                }
                for (const FieldProfile& profile : profiles) {
                    if (profile.epsilon() && !(p.d() * p.theta() > 1.0)) {
                        skipped.push_back({{"d", d},
                                           {"depth", depth},
                                           {"beta", number(p.beta())},
                                           {"profile", profile.describe()},
                                           {"reason", "theta <= 1/d: no critical field"}});
                        continue;
                    }
                    for (double b : boundaries) {
                        const auto rep = verify_compatibility(TreeGeometry(d, depth), p,
                                                              fields_from_profile(profile, p, depth, b), c.workers);
                        const bool pass = rep.max_residual <= kCompatibilityTolerance;
                        worst = std::max(worst, rep.max_residual);
                        if (!pass) ++failures;
                        rows.push_back({{"d", d},
                                        {"depth", depth},
                                        {"beta", number(p.beta())},
                                        {"theta", number(p.theta())},
                                        {"profile", profile.describe()},
                                        {"b_n", number(b)},
                                        {"b_prev", number(rep.b_prev)},
                                        {"max_residual", number(rep.max_residual)},
                                        {"pass", pass}});
                        r.csv_rows.push_back({std::to_string(d), std::to_string(depth), format_number(p.beta()),
                                              format_number(p.theta()), profile.describe(), format_number(b),
                                              format_number(rep.b_prev), format_number(rep.max_residual),
                                              pass ? "true" : "false"});
                    }
                }
            }
        }
    }
    r.results["rows"] = rows;
    r.results["max_residual"] = number(worst);
    r.results["tolerance"] = number(kCompatibilityTolerance);
    r.results["failures"] = failures;
    r.diagnostics["skipped"] = skipped;
    r.exit_code = failures > 0 ? 1 : 0;
    return r;
}

Report dispatch(const RunConfig& c) {
    switch (c.command) {
        case Command::Critical: return cmd_critical(c);
        case Command::Classify: return cmd_classify(c);
        case Command::SweepGamma: return cmd_sweep_gamma(c);
        case Command::Iterate: return cmd_iterate(c);
        case Command::ConditionSum: return cmd_condition_sum(c);
        case Command::Verify: return cmd_verify(c);
    }
    throw DomainError("unknown command");
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    return quoted + "\"";
}

std::string render(const RunConfig& c, const Report& r) {
    if (c.format == OutputFormat::Csv) {
        std::string text;
        const auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) text += (i ? "," : "") + csv_cell(cells[i]);
            text += "\n";
        };
        line(r.csv_header);
        for (const auto& row : r.csv_rows) line(row);
        return text;
    }
    ojson doc;
    doc["schema"] = 1;
    doc["command"] = to_string(c.command);
    doc["config"] = config_to_json(c);
    doc["results"] = r.results;
    doc["diagnostics"] = r.diagnostics;
    return doc.dump(2) + "\n";
}

// CLI11 reads "--h -auto" as two options; glue values that start with '-'
// onto their flag.
std::vector<std::string> glue_negative_values(const std::vector<std::string>& args) {
    static const std::set<std::string> valued{"--h",     "--seed-b", "--b",     "--b2",        "--from",
                                              "--to",    "--theta",  "--beta",  "--J",         "--gamma",
                                              "--gammas", "--n",     "--depth", "--tau-gap",  "--tau-uniq"};
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (valued.count(args[i]) && i + 1 < args.size() && args[i + 1].size() > 1 && args[i + 1][0] == '-' &&
            args[i + 1][1] != '-') {
            out.push_back(args[i] + "=" + args[i + 1]);
            ++i;
        } else {
            out.push_back(args[i]);
        }
    }
    return out;
}

struct ParsedArgs {
    RunConfig config;
    bool help = false;
    std::string help_text;
};

void add_model_options(CLI::App* sub, RunConfig& c, std::optional<double>& beta, std::optional<double>& theta) {
    sub->add_option("--d", c.d, "branching number (children per vertex)")->capture_default_str();
    sub->add_option("--J", c.J, "coupling constant")->capture_default_str();
    sub->add_option("--beta", beta, "inverse temperature");
    sub->add_option("--theta", theta, "tanh(beta J), used verbatim");
}

void add_profile_options(CLI::App* sub, double& gamma, std::vector<double>& geom, std::string& file) {
    auto* g = sub->add_option("--gamma", gamma, "power-law perturbation eps_n = n^-gamma");
    auto* r = sub->add_option("--geom", geom, "geometric perturbation eps_n = a r^(n-1), given as r a")->expected(2);
    auto* f = sub->add_option("--epsilon-file", file, "perturbation values, one per line");
    g->excludes(r)->excludes(f);
    r->excludes(f);
}

void add_classify_options(CLI::App* sub, RunConfig& c) {
    sub->add_option("--depths", c.depths, "depth schedule")->delimiter(',')->capture_default_str();
    sub->add_option("--probes", c.probes, "probe generations")->delimiter(',')->capture_default_str();
    sub->add_option("--tau-gap", c.tau_gap, "transition threshold on the final gap")->capture_default_str();
    sub->add_option("--tau-uniq", c.tau_uniq, "uniqueness threshold on the final gap")->capture_default_str();
}

ParsedArgs parse(const std::vector<std::string>& raw) {
    ParsedArgs parsed;
    RunConfig& c = parsed.config;
    std::optional<double> beta, theta;
    double gamma = 0.0;
    std::vector<double> geom;
    std::string file, format = "json";

    CLI::App app{"Ising model on a Cayley tree with a perturbed critical field", "cayley"};
    app.set_help_flag("--help", "print help");  // -h would collide with --h
    app.require_subcommand(1);
    std::vector<std::pair<CLI::App*, Command>> subs;
    const auto make = [&](Command cmd, const char* help) {
        CLI::App* sub = app.add_subcommand(to_string(cmd), help);
        add_model_options(sub, c, beta, theta);
        sub->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
        sub->add_option("--out", c.out, "write output to this file instead of standard output");
        sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        subs.emplace_back(sub, cmd);
        return sub;
    };

    auto* critical = make(Command::Critical, "critical temperature, critical field and fixed points");
    critical->add_option("--h", c.h, "field: a number, auto (+h_c) or -auto (-h_c)")->capture_default_str();

    auto* cls = make(Command::Classify, "transition or uniqueness verdict for one profile");
    add_profile_options(cls, gamma, geom, file);
    cls->add_option("--h", c.h, "homogeneous field when no perturbation is given")->capture_default_str();
    add_classify_options(cls, c);

    auto* sweep = make(Command::SweepGamma, "classify a grid of power-law exponents");
    sweep->add_option("--gammas", c.gammas, "exponent grid")->delimiter(',')->capture_default_str();
    add_classify_options(sweep, c);

    auto* iterate = make(Command::Iterate, "backward recursion trace");
    add_profile_options(iterate, gamma, geom, file);
    iterate->add_option("--h", c.h, "homogeneous field when no perturbation is given")->capture_default_str();
    iterate->add_option("--seed-b", c.seed_b, "seed at the deepest generation: plus, minus, inf, minus-inf or a value")
        ->capture_default_str();
    iterate->add_option("--from", c.from, "deepest generation")->capture_default_str();
    iterate->add_option("--to", c.to, "shallowest generation")->capture_default_str();

    auto* cond = make(Command::ConditionSum, "summability diagnostics for a perturbation");
    add_profile_options(cond, gamma, geom, file);
    cond->add_option("--n", c.horizon, "horizon")->capture_default_str();

    auto* verify = make(Command::Verify, "compatibility check against exact enumeration");
    add_profile_options(verify, gamma, geom, file);
    verify->add_option("--h", c.h, "homogeneous field of the unperturbed profile")->capture_default_str();
    verify->add_option("--depth", c.verify_depths, "volume depths")->delimiter(',');
    verify->add_option("--ds", c.verify_d, "branching numbers")->delimiter(',');
    verify->add_option("--betas", c.verify_betas, "inverse temperatures")->delimiter(',');
    verify->add_option("--b,--b2", c.verify_boundaries, "boundary values b_n")->delimiter(',');

    std::vector<std::string> args = glue_negative_values(raw);
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        parsed.help = true;
        for (const auto& [sub, cmd] : subs)
            if (sub->parsed()) parsed.help_text = sub->help();
        if (parsed.help_text.empty()) parsed.help_text = app.help();
        return parsed;
    }

    for (const auto& [sub, cmd] : subs) {
        if (!sub->parsed()) continue;
        c.command = cmd;
        const auto given = [sub](const char* name) {
            const CLI::Option* o = sub->get_option_no_throw(name);
            return o != nullptr && o->count() > 0;
        };
        // --d doubles as the verify grid's branching number
        if (cmd == Command::Verify && given("--d") && c.verify_d.empty()) c.verify_d = {c.d};
        if (given("--gamma")) {
            c.profile.kind = ProfileKind::PowerLaw;
            c.profile.gamma = gamma;
        } else if (given("--geom")) {
            c.profile.kind = ProfileKind::Geometric;
            c.profile.ratio = geom.at(0);
            c.profile.amplitude = geom.at(1);
        } else if (given("--epsilon-file")) {
            c.profile.kind = ProfileKind::File;
            c.profile.path = file;
            c.profile.values = read_epsilon_file(file);
        }
    }
    c.beta = beta;
    c.theta = theta;
    c.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
    return parsed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        const ParsedArgs parsed = parse(args);
        if (parsed.help) {
            out << parsed.help_text;
            return 0;
        }
        const Report report = dispatch(parsed.config);
        const std::string text = render(parsed.config, report);
        if (parsed.config.out.empty()) {
            out << text;
        } else {
            std::ofstream file(parsed.config.out, std::ios::binary);
            if (!file) throw DomainError("cannot write '" + parsed.config.out + "'");
            file << text;
        }
        return report.exit_code;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace cayley::cli
