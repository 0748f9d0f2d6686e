#pragma once

// Built-in measures used across tests, diagnostics and the CLI.

#include <memory>

#include "nsshift/construction.hpp"
#include "nsshift/measure.hpp"

namespace nsshift {

/// All coordinates carry the same factor (shift invariant by construction).
inline ProductMeasure constant_measure(Factor f) {
    auto rule = std::make_shared<const BlockRule>(std::vector<Block>{}, f,
                                                  NegTail(ConstTail{f}));
    return ProductMeasure(rule);
}

inline ProductMeasure fair_measure() { return constant_measure(fair_factor()); }

/// (p, 1-p) below zero, fair from zero on.
inline ProductMeasure step_measure(double p_neg = 0.9) {
    auto rule = std::make_shared<const BlockRule>(std::vector<Block>{}, fair_factor(),
                                                  NegTail(ConstTail{Factor(p_neg)}));
    return ProductMeasure(rule);
}

/// Fair everywhere except a single perturbed coordinate at the origin.
inline ProductMeasure perturbed_measure(double p0_at_origin = 0.9) {
    std::vector<Block> blocks{Block{BigIndex(0), BigIndex(0), Factor(p0_at_origin)}};
    auto rule = std::make_shared<const BlockRule>(std::move(blocks), fair_factor(),
                                                  NegTail(ConstTail{fair_factor()}));
    return ProductMeasure(rule);
}

/// (0.3, .) on even k < 0 and (0.7, .) on odd k < 0, fair on k >= 0.
inline ProductMeasure alternating_measure() {
    std::vector<Block> blocks{Block{BigIndex(-2), BigIndex(-2), Factor(0.3)},
                              Block{BigIndex(-1), BigIndex(-1), Factor(0.7)}};
    // below the blocks: k = -3 is odd, then alternation continues
    PeriodicTail tail{{Factor(0.7), Factor(0.3)}};
    auto rule = std::make_shared<const BlockRule>(std::move(blocks), fair_factor(),
                                                  NegTail(std::move(tail)));
    return ProductMeasure(rule);
}

/// Two accumulation values on geometrically growing plateau blocks, joined by
/// ramps with geometrically shrinking steps; nonsingular with no limit.
inline ProductMeasure staircase_measure(double hi = 0.7, double lo = 0.3) {
    auto rule = std::make_shared<const BlockRule>(std::vector<Block>{}, fair_factor(),
                                                  NegTail(StaircaseTail{hi, lo, 1}));
    return ProductMeasure(rule);
}

/// The inductive product measure at the given build depth.
inline ProductMeasure level_measure(int levels, EpsilonPolicy eps = {}) {
    auto scheme = std::make_shared<const LevelScheme>(levels, eps);
    return measure_from_levels(scheme);
}

}
