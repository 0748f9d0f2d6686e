#pragma once

// File formats: measures and level exports as JSON documents (numbers as
// 17-significant-digit strings, bignums as decimal strings, tower integers as
// structured expressions), plus a small CSV writer for series. Every document
// round-trips losslessly; level files are validated against a deterministic
// rebuild on load.

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsshift/construction.hpp"
#include "nsshift/errors.hpp"
#include "nsshift/fixtures.hpp"
#include "nsshift/measure.hpp"
#include "nsshift/version.hpp"

namespace nsshift {

using json = nlohmann::json;

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return std::stod(j.get<std::string>());
    throw BadMeasureSpec("expected a number or numeric string");
}

// ---- tower integers -----------------------------------------------------------

inline json huge_to_json(const HugeInt& h) {
    if (h.is_explicit()) return json{{"dec", to_decimal(h.to_bigindex())}};
    json terms = json::array();
    for (const auto& t : h.terms()) {
        json jt;
        jt["coeff"] = huge_to_json(*t.coeff);
        jt["exp2"] = huge_to_json(*t.exp2);
        if (t.ceil_j) jt["ceil_ln2_j"] = huge_to_json(*t.ceil_j);
        terms.push_back(std::move(jt));
    }
    return json{{"sum", {{"small", to_decimal(h.explicit_part())}, {"terms", std::move(terms)}}}};
}

inline HugeInt huge_from_json(const json& j) {
    if (j.contains("dec")) return HugeInt(parse_decimal(j.at("dec").get<std::string>()));
    if (!j.contains("sum")) throw BadMeasureSpec("malformed tower integer");
    const json& s = j.at("sum");
    HugeInt acc(parse_decimal(s.at("small").get<std::string>()));
    for (const json& jt : s.at("terms")) {
        HugeInt coeff = huge_from_json(jt.at("coeff"));
        HugeInt exp2 = huge_from_json(jt.at("exp2"));
        HugeInt term = coeff.mul_pow2(exp2);
        if (jt.contains("ceil_ln2_j")) {
            HugeInt j2 = huge_from_json(jt.at("ceil_ln2_j"));
            term = HugeInt::mul(term, HugeInt::ceil_ln2(j2, /*explicit_bits_cap=*/0));
        }
        acc = HugeInt::add(acc, term);
    }
    return acc;
}

// ---- measures ------------------------------------------------------------------

inline json measure_to_json(const ProductMeasure& P) {
    json j;
    j["format"] = "nsshift-measure-v1";
    j["shift"] = to_decimal(P.shift_offset());
    json blocks = json::array();
    for (const auto& b : P.rule().blocks())
        blocks.push_back(json{{"lo", to_decimal(b.lo)},
                              {"hi", to_decimal(b.hi)},
                              {"p0", format_double(b.f.p0())}});
    j["blocks"] = std::move(blocks);
    j["cover_lo"] = to_decimal(P.rule().cover_lo());
    j["pos_tail"] = json{{"p0", format_double(P.rule().pos_tail().p0())}};
    j["neg_tail"] = std::visit(
        [](const auto& t) -> json {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, ConstTail>)
                return json{{"kind", "const"}, {"p0", format_double(t.f.p0())}};
            else if constexpr (std::is_same_v<T, PeriodicTail>) {
                json cyc = json::array();
                for (const auto& f : t.cycle) cyc.push_back(format_double(f.p0()));
                return json{{"kind", "periodic"}, {"cycle_p0", std::move(cyc)}};
            } else if constexpr (std::is_same_v<T, StaircaseTail>)
                return json{{"kind", "staircase"},
                            {"hi_p0", format_double(t.hi_p0)},
                            {"lo_p0", format_double(t.lo_p0)},
                            {"first_epoch", t.first_epoch},
                            {"symbol_swap", t.symbol_swap}};
            else if constexpr (std::is_same_v<T, LevelTail>) {
                auto* kv = dynamic_cast<const SchemeTailView*>(t.view.get());
                if (!kv)
                    throw BadMeasureSpec("only construction level tails serialize");
                return json{{"kind", "levels"},
                            {"count", kv->scheme()->requested()},
                            {"eps", kv->scheme()->eps().to_string()},
                            {"limit_p0", format_double(t.limit.p0())}};
            } else
                return json{{"kind", "opaque"}, {"p0", format_double(t.observed.p0())}};
        },
        P.rule().neg_tail());
    return j;
}

inline ProductMeasure measure_from_json(const json& j) {
    if (j.value("format", "") != "nsshift-measure-v1")
        throw BadMeasureSpec("not a measure document");
    const BigIndex shift = parse_decimal(j.at("shift").get<std::string>());
    const json& nt = j.at("neg_tail");
    const std::string kind = nt.at("kind").get<std::string>();

    if (kind == "levels") {
        auto scheme = std::make_shared<const LevelScheme>(
            nt.at("count").get<int>(), EpsilonPolicy::parse(nt.at("eps").get<std::string>()));
        return measure_from_levels(scheme).shifted(shift);
    }

    std::vector<Block> blocks;
    for (const json& jb : j.at("blocks"))
        blocks.push_back(Block{parse_decimal(jb.at("lo").get<std::string>()),
                               parse_decimal(jb.at("hi").get<std::string>()),
                               Factor(parse_double(jb.at("p0")))});
    const Factor pos(parse_double(j.at("pos_tail").at("p0")));

    NegTail tail = ConstTail{fair_factor()};
    if (kind == "const")
        tail = ConstTail{Factor(parse_double(nt.at("p0")))};
    else if (kind == "periodic") {
        PeriodicTail p;
        for (const json& f : nt.at("cycle_p0")) p.cycle.push_back(Factor(parse_double(f)));
        if (p.cycle.empty()) throw BadMeasureSpec("empty periodic cycle");
        bool constant = true;
        for (const auto& f : p.cycle) constant = constant && f == p.cycle.front();
        if (constant)
            tail = ConstTail{p.cycle.front()};
        else
            tail = std::move(p);
    } else if (kind == "staircase") {
        StaircaseTail s;
        s.hi_p0 = parse_double(nt.at("hi_p0"));
        s.lo_p0 = parse_double(nt.at("lo_p0"));
        s.first_epoch = nt.value("first_epoch", 1);
        s.symbol_swap = nt.value("symbol_swap", false);
        if (!(s.hi_p0 > s.lo_p0)) throw BadMeasureSpec("staircase needs hi_p0 > lo_p0");
        tail = s;
    } else if (kind == "opaque")
        tail = OpaqueTail{Factor(parse_double(nt.at("p0")))};
    else
        throw BadMeasureSpec("unknown negative tail kind '" + kind + "'");

    const BigIndex cover_lo = parse_decimal(j.value("cover_lo", "0"));
    auto rule = std::make_shared<const BlockRule>(std::move(blocks), pos, std::move(tail),
                                                  cover_lo);
    return ProductMeasure(rule, shift);
}

// ---- level exports -------------------------------------------------------------

inline json scaled_exponent_to_json(const ScaledExponent& s) {
    return json{{"a", to_decimal(s.a())}, {"b", to_decimal(s.b())}, {"k", to_decimal(s.k())}};
}

inline json levels_to_json(const LevelScheme& scheme) {
    json j;
    j["format"] = "nsshift-levels-v1";
    j["eps"] = scheme.eps().to_string();
    j["count"] = scheme.requested();
    json ls = json::array();
    for (const auto& lv : scheme.levels()) {
        if (lv.t > scheme.requested()) break;
        json jl;
        jl["t"] = lv.t;
        if (lv.t >= 2) {
            jl["eps_exp"] = lv.eps_exp;
            jl["k"] = huge_to_json(lv.k);
        }
        if (lv.lambda) jl["lambda"] = scaled_exponent_to_json(*lv.lambda);
        jl["n"] = huge_to_json(lv.n);
        jl["N"] = huge_to_json(lv.N);
        jl["m"] = huge_to_json(lv.m);
        jl["M"] = huge_to_json(lv.M);
        jl["M_prev"] = huge_to_json(lv.M_prev);
        jl["p0"] = format_double(lv.p0);
        ls.push_back(std::move(jl));
    }
    j["levels"] = std::move(ls);
    return j;
}

/// Rebuilds the scheme deterministically and verifies the document matches.
inline std::shared_ptr<const LevelScheme> levels_from_json(const json& j) {
    if (j.value("format", "") != "nsshift-levels-v1")
        throw BadMeasureSpec("not a levels document");
    auto scheme = std::make_shared<const LevelScheme>(
        j.at("count").get<int>(), EpsilonPolicy::parse(j.at("eps").get<std::string>()));
    const json& ls = j.at("levels");
    for (const json& jl : ls) {
        const int t = jl.at("t").get<int>();
        const auto& lv = scheme->levels().at(static_cast<std::size_t>(t - 1));
        for (const char* field : {"n", "N", "m", "M"}) {
            const HugeInt parsed = huge_from_json(jl.at(field));
            const HugeInt& built = field[0] == 'n'   ? lv.n
                                   : field[0] == 'N' ? lv.N
                                   : field[0] == 'm' ? lv.m
                                                     : lv.M;
            if (HugeInt::compare(parsed, built) != 0)
                throw BadMeasureSpec(std::string("level document field ") + field +
                                     " does not match the deterministic rebuild at t=" +
                                     std::to_string(t));
        }
    }
    return scheme;
}

// ---- provenance and CSV -------------------------------------------------------

inline json with_provenance(json results, json config) {
    json j;
    j["tool"] = "nsshift";
    j["version"] = version_string;
    j["config"] = std::move(config);
    j["results"] = std::move(results);
    return j;
}

class CsvWriter {
public:
    explicit CsvWriter(json config) : config_(std::move(config)) {}

    void header(const std::vector<std::string>& cols) {
        out_ << "# nsshift " << version_string << "\n";
        out_ << "# config " << config_.dump() << "\n";
        write_row(cols);
    }

    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ",";
            out_ << cells[i];
        }
        out_ << "\n";
    }

    std::string str() const { return out_.str(); }

private:
    json config_;
    std::ostringstream out_;
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path);
    f << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}
