#pragma once

// Command-line front end: construct, show-measure, distance, affinity,
// classify, rn-sample, zero-type-profile, conservativity, renewal, pwm.
// Every run is a pure function of its flags (plus the seed), outputs embed
// the configuration and tool version, and numbers are serialized at 17
// significant digits.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nsshift/classify.hpp"
#include "nsshift/config.hpp"
#include "nsshift/construction.hpp"
#include "nsshift/distance.hpp"
#include "nsshift/dynamics.hpp"
#include "nsshift/fixtures.hpp"
#include "nsshift/io.hpp"
#include "nsshift/renewal.hpp"

namespace nsshift::cli {

struct Output {
    std::string summary;             // structured-text report (JSON)
    std::optional<std::string> csv;  // series, when the subcommand makes one
};

inline ProductMeasure resolve_measure(const std::string& spec) {
    auto starts = [&](const std::string& p) { return spec.rfind(p, 0) == 0; };
    if (spec == "fair") return fair_measure();
    if (spec == "step") return step_measure();
    if (starts("step:")) return step_measure(std::stod(spec.substr(5)));
    if (spec == "perturbed") return perturbed_measure();
    if (starts("perturbed:")) return perturbed_measure(std::stod(spec.substr(10)));
    if (spec == "alternating") return alternating_measure();
    if (spec == "staircase") return staircase_measure();
    if (spec == "levels") return level_measure(2);
    if (starts("levels:")) return level_measure(std::stoi(spec.substr(7)));
    return measure_from_json(json::parse(read_text_file(spec)));
}

inline RenewalFunction resolve_renewal(const std::string& spec) {
    if (spec == "log") return log_renewal();
    if (spec.rfind("geom:", 0) == 0) return geometric_renewal(std::stod(spec.substr(5)));
    if (spec.rfind("table:", 0) == 0) {
        std::vector<std::pair<double, double>> pts;
        std::istringstream in(read_text_file(spec.substr(6)));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            double t, v;
            if (std::sscanf(line.c_str(), "%lf,%lf", &t, &v) == 2) pts.push_back({t, v});
        }
        return table_renewal(std::move(pts));
    }
    throw Error("unknown renewal function '" + spec + "' (use log, geom:q or table:file)");
}

inline std::pair<BigIndex, BigIndex> parse_window(const std::string& s) {
    const auto pos = s.find(':', 1);  // allow a leading minus
    if (pos == std::string::npos) throw Error("window must look like lo:hi, got '" + s + "'");
    return {parse_decimal(s.substr(0, pos)), parse_decimal(s.substr(pos + 1))};
}

inline std::vector<long> parse_long_list(const std::string& s) {
    std::vector<long> out;
    const auto colon = s.find(':', 1);
    if (colon != std::string::npos && s.find(',') == std::string::npos) {
        const long a = std::stol(s.substr(0, colon));
        const long b = std::stol(s.substr(colon + 1));
        for (long v = a; v <= b; ++v) out.push_back(v);
        return out;
    }
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stol(tok));
    if (out.empty()) throw Error("empty list '" + s + "'");
    return out;
}

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
    if (out.empty()) throw Error("empty list '" + s + "'");
    return out;
}

inline json distance_result_json(const DistanceResult& r) {
    json j;
    if (auto* f = std::get_if<FiniteDistance>(&r)) {
        j["kind"] = "finite";
        j["value"] = format_double(f->value);
        j["tail_bound"] = format_double(f->tail_bound);
    } else if (auto* d = std::get_if<DivergesDistance>(&r)) {
        j["kind"] = "diverges";
        j["per_unit"] = format_double(d->per_unit);
        j["witness"] = d->witness;
    } else {
        j["kind"] = "undecidable";
        j["diagnostic"] = std::get<UndecidableDistance>(r).diagnostic;
    }
    return j;
}

// ---- subcommand bodies -----------------------------------------------------

inline Output run_construct(int levels, const std::string& eps_s,
                            const std::string& measure_out, json config) {
    auto scheme = std::make_shared<const LevelScheme>(levels, EpsilonPolicy::parse(eps_s));
    std::vector<LevelParams> built(scheme->levels().begin(),
                                   scheme->levels().begin() + levels);

    json verification;
    verification["lambda_constraint"] = json::array();
    for (const auto& lv : built)
        verification["lambda_constraint"].push_back(
            json{{"t", lv.t}, {"pass", verify_lambda_constraint(lv)}});
    verification["growth"] = json::array();
    for (const auto& rep : verify_growth(built))
        verification["growth"].push_back(
            json{{"t", rep.t}, {"pass", rep.pass}, {"witness", rep.witness}});
    verification["n_minimality"] = json::array();
    for (int t = 2; t <= levels; ++t) {
        auto rep = verify_n_minimality(built, t);
        verification["n_minimality"].push_back(json{{"t", t},
                                                    {"holds_at_n", rep.holds_at_n},
                                                    {"fails_below", rep.fails_below},
                                                    {"method", rep.method}});
    }

    json doc = levels_to_json(*scheme);
    doc["version"] = version_string;
    doc["config"] = config;

    if (!measure_out.empty()) {
        json md = measure_to_json(measure_from_levels(scheme));
        md["version"] = version_string;
        md["config"] = config;
        write_text_file(measure_out, md.dump(2) + "\n");
    }

    Output out;
    out.summary = with_provenance(verification, std::move(config)).dump(2) + "\n";
    out.csv = doc.dump(2) + "\n";  // the levels document is the artifact
    return out;
}

inline Output run_show_measure(const ProductMeasure& P, const BigIndex& lo, const BigIndex& hi,
                               json config) {
    json rows = json::array();
    BigIndex k = lo;
    long guard = 0;
    while (k <= hi) {
        const BigIndex e = P.run_end(k, hi);
        rows.push_back(json{{"lo", to_decimal(k)},
                            {"hi", to_decimal(e)},
                            {"p0", format_double(P.factor_at(k).p0())}});
        k = e + 1;
        if (++guard > 100000) throw IterationBudgetExceeded("show-measure window too busy");
    }
    json res;
    res["runs"] = std::move(rows);
    res["document"] = measure_to_json(P);
    Output out;
    out.summary = with_provenance(res, std::move(config)).dump(2) + "\n";
    return out;
}

inline Output run_distance(const ProductMeasure& P, const ProductMeasure& Q, const BigIndex& N,
                           bool exact, json config) {
    json res;
    res["d_N"] = format_double(kakutani_distance_truncated(P, Q, N).value());
    if (exact) res["exact"] = distance_result_json(kakutani_distance_exact(P, Q));
    auto rep = proportionality_check(P, Q, N);
    res["proportionality"] = json{{"d", format_double(rep.d)},
                                  {"minus_log_rho", format_double(rep.minus_log_rho)},
                                  {"c", format_double(rep.c)},
                                  {"degenerate", rep.degenerate},
                                  {"holds", rep.holds}};
    Output out;
    out.summary = with_provenance(res, std::move(config)).dump(2) + "\n";
    return out;
}

inline Output run_affinity(const ProductMeasure& P, const ProductMeasure& Q, const BigIndex& N,
                           json config) {
    json res;
    res["rho_N"] = format_double(hellinger_affinity(P, Q, N));
    Output out;
    out.summary = with_provenance(res, std::move(config)).dump(2) + "\n";
    return out;
}

inline Output run_classify(const ProductMeasure& P, json config) {
    const Classification c = classify(P);
    json res;
    res["verdict"] = verdict_name(c);
    if (auto* e = std::get_if<EquivalentInvariant>(&c)) {
        res["distance"] = format_double(e->distance);
        res["tail_bound"] = format_double(e->tail_bound);
        res["invariant_p0"] = format_double(e->q.factor_at(BigIndex(0)).p0());
    } else if (auto* w = std::get_if<NotNonsingular>(&c)) {
        res["per_unit"] = format_double(w->witness.per_unit);
        res["witness"] = w->witness.witness;
    } else if (auto* z = std::get_if<ZeroTypeVerdict>(&c)) {
        res["detail"] = z->detail;
    } else if (auto* d = std::get_if<DegenerateVerdict>(&c)) {
        res["limit_p0"] = format_double(d->limit_p0);
    } else if (auto* i = std::get_if<Inconclusive>(&c)) {
        res["diagnostic"] = i->diagnostic;
    }
    Output out;
    out.summary = with_provenance(res, std::move(config)).dump(2) + "\n";
    return out;
}

inline Output run_rn_sample(const ProductMeasure& P, long n, const Window& win,
                            std::uint64_t seed, long count, json config) {
    CsvWriter csv(config);
    csv.header({"sample", "rn", "log_rn"});
    const ProductMeasure Pn = P.shifted(BigIndex(n));
    double sum = 0;
    for (long i = 0; i < count; ++i) {
        LazyPath w(P, seed, static_cast<std::uint64_t>(i));
        const double lv = rn_log_windowed(P, Pn, win, w);
        csv.write_row({std::to_string(i), format_double(std::exp(lv)), format_double(lv)});
        sum += std::exp(lv);
    }
    auto mean = mean_rn_check(P, BigIndex(n), win, seed, count);
    auto sqrt_rep = sqrt_rn_estimator(P, BigIndex(n), win, seed, count);
    json res;
    res["mc_mean"] = format_double(sum / static_cast<double>(count));
    res["mean_check"] = json{{"exact_product", format_double(mean.exact_product)},
                             {"mc_mean", format_double(mean.mc_mean)},
                             {"mc_stderr", format_double(mean.mc_stderr)},
                             {"within_4sigma", mean.within_4sigma}};
    res["sqrt_check"] = json{{"estimate", format_double(sqrt_rep.estimate)},
                             {"affinity_target", format_double(sqrt_rep.affinity_target)},
                             {"within_4sigma", sqrt_rep.within_4sigma}};
    Output out;
    out.summary = with_provenance(res, std::move(config)).dump(2) + "\n";
    out.csv = csv.str();
    return out;
}

inline Output run_zero_type_profile(const ProductMeasure& P, const std::vector<long>& ns,
                                    long fallback_N, json config) {
    auto rows = zero_type_profile(P, ns, BigIndex(fallback_N));
    CsvWriter csv(config);
    csv.header({"n", "d", "certificate", "rho_upper"});
    for (const auto& r : rows)
        csv.write_row({std::to_string(r.n), format_double(r.d), r.certificate,
                       format_double(r.rho_upper)});
    json res;
    res["rows"] = static_cast<long>(rows.size());
    res["last_d"] = format_double(rows.back().d);
    res["last_certificate"] = rows.back().certificate;
    Output out;
    out.summary = with_provenance(res, std::move(config)).dump(2) + "\n";
    out.csv = csv.str();
    return out;
}

inline Output run_conservativity(const ProductMeasure& P, const std::vector<long>& powers,
                                 long N, const Window& win, std::uint64_t seed, json config) {
    const PowerSpec spec{powers};
    std::vector<LazyPath> paths;
    std::vector<const BitSource*> ptrs;
    for (std::size_t i = 0; i < powers.size(); ++i)
        paths.emplace_back(P, seed, static_cast<std::uint64_t>(i));
    for (const auto& p : paths) ptrs.push_back(&p);
    auto rep = conservativity_sums(P, spec, ptrs, N, win);

    CsvWriter csv(config);
    csv.header({"n", "partial_sum"});
    for (std::size_t i = 0; i < rep.partial_sums.size(); ++i)
        csv.write_row({std::to_string(i + 1), format_double(rep.partial_sums[i])});

    json ledger = json::array();
    for (const auto& row : rep.ledger)
        ledger.push_back(json{{"t", row.t},
                              {"folds", row.folds},
                              {"L", row.L},
                              {"bound_holds", row.bound_holds},
                              {"log2_bound", format_double(row.log2_bound)}});
    json res;
    res["final_sum"] = format_double(rep.partial_sums.back());
    res["ledger"] = std::move(ledger);
    Output out;
    out.summary = with_provenance(res, std::move(config)).dump(2) + "\n";
    out.csv = csv.str();
    return out;
}

inline Output run_renewal(const RenewalFunction& p, long N, const std::string& check,
                          json config) {
    json res;
    CsvWriter csv(config);
    if (check == "null-recurrence") {
        auto rep = null_recurrence_verdict(p, N);
        res["verdict"] = verdict_name(rep.verdict);
        res["last_term"] = format_double(rep.last_term);
        res["terms_vanish"] = rep.terms_vanish;
        csv.header({"n", "partial_sum"});
        for (std::size_t i = 0; i < rep.partial_sums.size(); ++i)
            csv.write_row({std::to_string(i + 1), format_double(rep.partial_sums[i])});
    } else if (check == "aperiodicity") {
        auto seq = RenewalSequence::from_function(p, N);
        auto rep = aperiodicity_check(seq, N);
        res["verdict"] = rep.kind == AperiodicityResult::Kind::Aperiodic ? "Aperiodic"
                         : rep.kind == AperiodicityResult::Kind::Periodic
                             ? "Period(" + std::to_string(rep.period) + ")"
                             : "Unknown";
        json w = json::array();
        for (long n : rep.witness) w.push_back(n);
        res["witness"] = std::move(w);
        csv.header({"n", "u_n"});
        for (long n = 0; n <= std::min<long>(N, 64); ++n)
            csv.write_row({std::to_string(n), format_double(seq.u[static_cast<std::size_t>(n)])});
    } else if (check == "interarrival") {
        auto seq = RenewalSequence::from_function(p, N);
        auto f = interarrival_from_renewal(seq, N);
        auto back = renewal_from_interarrival(f, N);
        double worst = 0;
        for (std::size_t i = 0; i < back.u.size(); ++i)
            worst = std::max(worst, std::abs(back.u[i] - seq.u[i]));
        res["round_trip_max_error"] = format_double(worst);
        csv.header({"m", "f_m"});
        for (std::size_t m = 1; m < f.f.size(); ++m)
            csv.write_row({std::to_string(m), format_double(f.f[m])});
    } else {
        throw Error("unknown check '" + check +
                    "' (use null-recurrence, aperiodicity or interarrival)");
    }
    Output out;
    out.summary = with_provenance(res, std::move(config)).dump(2) + "\n";
    out.csv = csv.str();
    return out;
}

inline Output run_pwm(const RenewalFunction& p, const std::vector<double>& times, long N,
                      json config) {
    auto rep = pwm_criterion(p, times, N);
    CsvWriter csv(config);
    csv.header({"n", "partial_sum"});
    for (std::size_t i = 0; i < rep.partial_sums.size(); ++i)
        csv.write_row({std::to_string(i + 1), format_double(rep.partial_sums[i])});
    json res;
    res["verdict"] = verdict_name(rep.verdict);
    res["final_sum"] = format_double(rep.partial_sums.back());
    Output out;
    out.summary = with_provenance(res, std::move(config)).dump(2) + "\n";
    out.csv = csv.str();
    return out;
}

// ---- dispatch ----------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out_stream = std::cout,
               std::ostream& err_stream = std::cerr) {
    CLI::App app{"diagnostics for nonsingular product measures on the binary shift"};
    app.require_subcommand(1);

    int precision = precision_bits();
    app.add_option("--precision", precision, "floating accumulation width (53 or 64 bits)");

    std::string out_path;
    app.add_option("--out", out_path, "write the series/artifact to this file");

    // construct
    auto* c_construct = app.add_subcommand("construct", "build and verify levels");
    int levels = 4;
    std::string eps = "dyadic:2^-t";
    std::string measure_out;
    c_construct->add_option("--levels", levels, "level count")->required();
    c_construct->add_option("--eps", eps, "dyadic epsilon policy");
    c_construct->add_option("--measure-out", measure_out, "also write the product measure");

    // measure-based commands
    std::string m_spec, p_spec, q_spec;
    std::string window_s = "-400:10";
    long n_arg = 1;
    std::string n_list_s = "1:16";
    std::uint64_t seed = 0;
    long count = 10000;
    long big_n = 1000;
    bool exact = false;
    std::string powers_s = "1";

    auto* c_show = app.add_subcommand("show-measure", "print factor runs over a window");
    c_show->add_option("--measure", m_spec)->required();
    c_show->add_option("--window", window_s);

    auto* c_dist = app.add_subcommand("distance", "Kakutani distance between two measures");
    c_dist->add_option("--p", p_spec)->required();
    c_dist->add_option("--q", q_spec)->required();
    c_dist->add_option("--N", big_n);
    c_dist->add_flag("--exact", exact, "also certify the full-line distance");

    auto* c_aff = app.add_subcommand("affinity", "Hellinger affinity over a window");
    c_aff->add_option("--p", p_spec)->required();
    c_aff->add_option("--q", q_spec)->required();
    c_aff->add_option("--N", big_n);

    auto* c_cls = app.add_subcommand("classify", "equivalent-invariant / zero-type dichotomy");
    c_cls->add_option("--measure", m_spec)->required();

    auto* c_rn = app.add_subcommand("rn-sample", "sample windowed derivatives");
    c_rn->add_option("--measure", m_spec)->required();
    c_rn->add_option("--n", n_arg);
    c_rn->add_option("--window", window_s);
    c_rn->add_option("--seed", seed)->required();
    c_rn->add_option("--count", count);

    auto* c_prof = app.add_subcommand("zero-type-profile", "d(P, P∘T^n) series");
    c_prof->add_option("--measure", m_spec)->required();
    c_prof->add_option("--n", n_list_s);
    c_prof->add_option("--N", big_n, "fallback window when no certificate exists");

    auto* c_cons = app.add_subcommand("conservativity", "power-product partial sums and ledger");
    c_cons->add_option("--measure", m_spec)->required();
    c_cons->add_option("--powers", powers_s)->required();
    c_cons->add_option("--N", big_n);
    c_cons->add_option("--window", window_s);
    c_cons->add_option("--seed", seed)->required();

    std::string renewal_spec = "log", check = "null-recurrence", times_s = "1";
    auto* c_ren = app.add_subcommand("renewal", "renewal-sequence diagnostics");
    c_ren->add_option("--p", renewal_spec);
    c_ren->add_option("--N", big_n);
    c_ren->add_option("--check", check);

    auto* c_pwm = app.add_subcommand("pwm", "power-product divergence criterion");
    c_pwm->add_option("--p", renewal_spec);
    c_pwm->add_option("--times", times_s)->required();
    c_pwm->add_option("--N", big_n);

    for (auto* s : {c_construct, c_show, c_dist, c_aff, c_cls, c_rn, c_prof, c_cons, c_ren,
                    c_pwm})
        s->fallthrough();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        err_stream << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        set_precision_bits(precision);
        json config;
        config["precision"] = precision;
        for (const auto& a : args) config["argv"].push_back(a);

        Output out;
        if (*c_construct) {
            out = run_construct(levels, eps, measure_out, config);
        } else if (*c_show) {
            auto [lo, hi] = parse_window(window_s);
            out = run_show_measure(resolve_measure(m_spec), lo, hi, config);
        } else if (*c_dist) {
            out = run_distance(resolve_measure(p_spec), resolve_measure(q_spec),
                               BigIndex(big_n), exact, config);
        } else if (*c_aff) {
            out = run_affinity(resolve_measure(p_spec), resolve_measure(q_spec),
                               BigIndex(big_n), config);
        } else if (*c_cls) {
            out = run_classify(resolve_measure(m_spec), config);
        } else if (*c_rn) {
            auto [lo, hi] = parse_window(window_s);
            out = run_rn_sample(resolve_measure(m_spec), n_arg, Window{lo, hi}, seed, count,
                                config);
        } else if (*c_prof) {
            out = run_zero_type_profile(resolve_measure(m_spec), parse_long_list(n_list_s),
                                        big_n, config);
        } else if (*c_cons) {
            auto [lo, hi] = parse_window(window_s);
            out = run_conservativity(resolve_measure(m_spec), parse_long_list(powers_s), big_n,
                                     Window{lo, hi}, seed, config);
        } else if (*c_ren) {
            out = run_renewal(resolve_renewal(renewal_spec), big_n, check, config);
        } else if (*c_pwm) {
            out = run_pwm(resolve_renewal(renewal_spec), parse_double_list(times_s), big_n,
                          config);
        }

        out_stream << out.summary;
        if (out.csv) {
            if (!out_path.empty())
                write_text_file(out_path, *out.csv);
            else
                out_stream << *out.csv;
        }
        return 0;
    } catch (const Error& e) {
        err_stream << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err_stream << "error: " << e.what() << "\n";
        return 1;
    }
}

}
