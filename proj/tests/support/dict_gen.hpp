// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/casekit/foam_node.hpp>

#include <random>
#include <string>
#include <vector>

namespace testing
{

/// Random dictionary trees restricted to shapes a dictionary file can spell:
/// bare lists only as entry values, never starting with a dict.
class DictGenerator
{
public:
    explicit DictGenerator(std::uint64_t seed): _rng(seed) {}

    foampilot::FoamNode dictionary(int depth = 0)
    {
        std::vector<foampilot::FoamEntry> entries;
        for (int n = uniform(0, depth == 0 ? 8 : 4); n > 0; --n)
            entries.push_back(entry(depth));
        return foampilot::FoamNode::dict(std::move(entries));
    }

private:
    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(_rng); }

    template<typename T>
    T const& pick(std::vector<T> const& v)
    {
        return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
    }

    std::string keyword()
    {
        static std::vector<std::string> const words { "solver", "tolerance", "div(phi,U)", "alpha.water", "p_rgh",
                                                      "box", "min", "max", "type", "value", "n",
                                                      "\"(U|k|epsilon)\"", "\".*\"", "laplacian(nuEff,U)", "Yi" };
        return pick(words);
    }

    foampilot::FoamNode scalar()
    {
        using foampilot::FoamNode;
        static std::vector<std::string> const words { "Gauss", "linear", "uniform", "none", "List<scalar>",
                                                      "limitedLinear01", "grad(U)", "fireFoam", "a-b_c.d", "U" };
        static std::vector<std::string> const strings { "", "caseDicts/setConstraintTypes", "C3H8 + 5O2 = 3CO2",
                                                        "$FOAM_CASE/x", "a // b /* c */", "(inlet|outlet)" };
        switch (uniform(0, 6))
        {
        case 0: return FoamNode::integer(uniform(-1000, 1000));
        case 1: return FoamNode::number(std::uniform_real_distribution<double>(-1e3, 1e3)(_rng));
        case 2: return FoamNode::scalar(pick(std::vector<std::string> { "1e-5", "-0.7e-5", "2.0", "+3", "1E15" }));
        case 3: return FoamNode::boolean(uniform(0, 1) == 1);
        case 4: return FoamNode::string(pick(strings));
        default: return FoamNode::word(pick(words));
        }
    }

    foampilot::FoamNode opaque()
    {
        using foampilot::FoamNode;
        static std::vector<std::string> const directives { "$internalField", "$:outlet.value", "#calc",
                                                           "#{ return 2*x; #}", "#{\n    code();\n#}" };
        return FoamNode::directive(pick(directives));
    }

    foampilot::FoamNode dimensions()
    {
        std::array<int, 7> e {};
        for (auto& x: e)
            x = uniform(-3, 3);
        return foampilot::FoamNode::dimensions(e);
    }

    foampilot::FoamNode value(int depth, bool allowDict)
    {
        using foampilot::FoamNode;
        int const roll = uniform(0, depth >= 3 ? 6 : 9);
        if (roll <= 3)
            return scalar();
        if (roll == 4)
            return dimensions();
        if (roll == 5 || roll == 6)
            return roll == 5 ? opaque() : scalar();
        if (roll == 9 && allowDict)
            return dictionary(depth + 1);
        std::vector<FoamNode> items;
        for (int n = uniform(0, roll == 8 ? 30 : 5); n > 0; --n)
            items.push_back(value(depth + 1, true));
        return FoamNode::list(std::move(items));
    }

    foampilot::FoamEntry entry(int depth)
    {
        using foampilot::FoamEntry;
        using foampilot::FoamNode;
        switch (uniform(0, 12))
        {
        case 0: return FoamEntry { {}, FoamNode::directive("#include \"meshQualityDict\"") };
        case 1: return FoamEntry { {}, FoamNode::directive("$shared") };
        case 2:
            if (depth < 3)
                return FoamEntry { keyword(), dictionary(depth + 1) };
            break;
        case 3: return FoamEntry { keyword(), FoamNode::list({}, true) };
        case 4:
        case 5:
        {
            std::vector<FoamNode> items;
            for (int n = uniform(2, 4); n > 0; --n)
                items.push_back(value(depth + 1, false));
            return FoamEntry { keyword(), FoamNode::list(std::move(items), true) };
        }
        default: break;
        }
        return FoamEntry { keyword(), value(depth, false) };
    }

    std::mt19937_64 _rng;
};

} // namespace testing
