#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnw/distributions.hpp"
#include "nnw/nn_measure.hpp"

namespace nnw {

[[nodiscard]] inline std::vector<std::string> eta_names() {
    return {"identity", "square", "inv_quarter_power", "cantor_indicator", "one"};
}

namespace detail {

[[nodiscard]] inline std::shared_ptr<const IntervalSet> cantor_set_of(const DistributionPair& pair) {
    for (const DistributionSpec* d : {&pair.mu0, &pair.mu1})
        if (const auto* c = d->as<FatCantorUniform>()) return c->set;
    return nullptr;
}

}  // namespace detail

/// Named integrands. All act on the first coordinate. cantor_indicator is
/// 2 * 1{x in C} with C the fat Cantor set of whichever side of the pair has one.
[[nodiscard]] inline EtaFunction make_eta(const std::string& name, const DistributionPair& pair) {
    if (name == "identity") return {name, [](std::span<const double> x) { return x[0]; }, std::nullopt};
    if (name == "square") return {name, [](std::span<const double> x) { return x[0] * x[0]; }, std::nullopt};
    if (name == "one") return {name, [](std::span<const double>) { return 1.0; }, std::nullopt};
    if (name == "inv_quarter_power")
        return {name,
                [](std::span<const double> x) {
                    return x[0] > 0.0 ? std::pow(x[0], -0.25) : std::numeric_limits<double>::infinity();
                },
                std::nullopt};
    if (name == "cantor_indicator") {
        auto set = detail::cantor_set_of(pair);
        if (!set) throw std::invalid_argument("cantor_indicator needs a fat_cantor distribution in the pair");
        return {name, [set](std::span<const double> x) { return set->contains(x[0]) ? 2.0 : 0.0; }, std::nullopt};
    }
    std::string known;
    for (const auto& n : eta_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown eta '" + name + "' (known: " + known + ")");
}

/// A target/sampling pair with its integrand and the limit of the 1NN measure estimate.
struct Example {
    std::string name;
    DistributionPair pair;
    EtaFunction eta;
    double limit;
    std::vector<double> reference;  ///< published single-draw values at n = 1e2..1e5, if any
};

[[nodiscard]] inline std::vector<std::string> builtin_example_names() {
    return {"beta", "gaussian", "fat_cantor", "uniform"};
}

[[nodiscard]] inline Example builtin_example(const std::string& name) {
    if (name == "beta") {
        auto pair = DistributionPair::make(DistributionSpec::beta(0.75, 1.0), DistributionSpec::beta(1.25, 1.0));
        auto eta = make_eta("inv_quarter_power", pair);
        return {name, std::move(pair), std::move(eta), 1.5, {1.472, 1.483, 1.492, 1.493}};
    }
    if (name == "gaussian") {
        auto pair = DistributionPair::make(DistributionSpec::gaussian(0.0, 2.1), DistributionSpec::gaussian(0.0, 1.0));
        auto eta = make_eta("square", pair);
        return {name, std::move(pair), std::move(eta), 2.1, {1.774, 1.991, 2.063, 2.083}};
    }
    if (name == "fat_cantor") {
        auto pair = DistributionPair::make(DistributionSpec::fat_cantor(5), DistributionSpec::uniform(0.0, 1.0));
        auto eta = make_eta("cantor_indicator", pair);
        return {name, std::move(pair), std::move(eta), 2.0, {1.587, 1.842, 1.970, 1.997}};
    }
    if (name == "uniform") {
        auto pair = DistributionPair::make(DistributionSpec::uniform(0.0, 1.0), DistributionSpec::uniform(0.0, 1.0));
        auto eta = make_eta("identity", pair);
        return {name, std::move(pair), std::move(eta), 0.5, {}};
    }
    std::string known;
    for (const auto& n : builtin_example_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown example '" + name + "' (built in: " + known + ")");
}

}  // namespace nnw
