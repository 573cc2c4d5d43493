#pragma once

#include <random>

#include "pagcid/graph.hpp"

namespace pagcid {

struct RandomGraphOptions {
    int outputs = 4;
    int inputs = 0;
    int selections = 0;
    int latents = 0;
    double edge_p = 0.4;       // directed edge between an ordered pair
    double bidirected_p = 0.2;  // confounding between an output pair
};

// Random ilsADMG: a DAG over outputs in a random order plus input parents,
// bidirected confounding, selection nodes with random observed parents and
// latents with two or more children. Output ids are v0, v1, ...
MixedGraph random_admg(std::mt19937_64& rng, const RandomGraphOptions& opt = {});

// mag_of(random_admg(...)).
MixedGraph random_mag(std::mt19937_64& rng, const RandomGraphOptions& opt = {});

}  // namespace pagcid
