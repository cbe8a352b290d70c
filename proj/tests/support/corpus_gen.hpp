// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "helpers.hpp"

#include <fmt/format.h>

#include <string>
#include <vector>

namespace testing
{

constexpr std::string_view LicenseBanner =
    "/*---------------------------------------------------------------------------*\\\n"
    "  =========                 |\n"
    "  \\\\      /  F ield         | OpenFOAM: The Open Source CFD Toolbox\n"
    "   \\\\    /   O peration     |\n"
    "    \\\\  /    A nd           | Copyright (C) 2011-2024 OpenFOAM Foundation\n"
    "     \\\\/     M anipulation  |\n"
    "-------------------------------------------------------------------------------\n"
    "License\n"
    "    This file is part of OpenFOAM.\n"
    "\n"
    "    OpenFOAM is free software: you can redistribute it and/or modify it\n"
    "    under the terms of the GNU General Public License as published by\n"
    "    the Free Software Foundation, either version 3 of the License, or\n"
    "    (at your option) any later version.\n"
    "\n"
    "\\*---------------------------------------------------------------------------*/\n"
    "\n";

/// Pronounceable made-up word, unique per index.
inline std::string nonsense_word(std::size_t i)
{
    static constexpr std::string_view onset[] = { "b", "dr", "k", "gl", "v", "z", "thr", "p", "sn", "qu" };
    static constexpr std::string_view vowel[] = { "a", "o", "u", "e", "i" };
    static constexpr std::string_view coda[] = { "rk", "x", "lm", "nd", "st" };
    std::string w;
    for (int s = 0; s < 3; ++s)
    {
        w += onset[(i + 3 * s) % 10];
        w += vowel[(i / 10 + s) % 5];
        w += coda[(i / 50 + s + i) % 5];
        i = i * 7 + 3;
    }
    return w;
}

struct SyntheticPair
{
    std::string stem;
    std::string term;
};

/// 50-ish header/source pairs under `root`, each with one distinctive
/// function name built from a unique nonsense word. Shared vocabulary makes
/// the documents look alike apart from that name.
inline std::vector<SyntheticPair> write_synthetic_corpus(fs::path const& root, std::size_t pairs)
{
    std::vector<SyntheticPair> out;
    for (std::size_t i = 0; i < pairs; ++i)
    {
        auto const word = nonsense_word(i);
        auto const term = "compute" + std::string(1, char(std::toupper(word[0]))) + word.substr(1) + "Rate";
        auto const stem = fmt::format("model{:02}", i);
        auto const dir = root / fmt::format("src/group{}", i % 5) / stem;
        write_file(dir / (stem + ".H"),
                   std::string(LicenseBanner)
                       + fmt::format("#ifndef {0}_H\n#define {0}_H\n\nnamespace Foam\n{{\n\n"
                                     "// Sub-model {0} of the thermophysical library\n"
                                     "class {0}\n{{\n    volScalarField rate_;\n    scalar coeff_;\n\n"
                                     "public:\n    void correct();\n    tmp<volScalarField> {1}() const;\n}};\n\n"
                                     "}}\n\n#endif\n",
                                     stem, term));
        write_file(dir / (stem + ".C"),
                   std::string(LicenseBanner)
                       + fmt::format("#include \"{0}.H\"\n\nvoid Foam::{0}::correct()\n{{\n"
                                     "    rate_ = coeff_*rate_;\n}}\n\n"
                                     "Foam::tmp<Foam::volScalarField> Foam::{0}::{1}() const\n{{\n"
                                     "    // evaluates the {0} rate\n    return rate_;\n}}\n",
                                     stem, term));
        out.push_back({ stem, term });
    }
    return out;
}

} // namespace testing
