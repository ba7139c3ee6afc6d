#pragma once

#include <string>

#include "hetmap/appgraph.hpp"
#include "hetmap/evaluator.hpp"

namespace hetmap {

// Graphviz DOT text: node shape by kind, compute labels carry p and c;
// with a mapping, nodes are filled with a color keyed by assigned unit.
std::string render_dot(const AppGraph& g, const Mapping* mapping = nullptr);

// SVG Gantt chart: one lane per unit, bars colored by event kind,
// deterministic output for identical timelines.
std::string render_gantt(const Timeline& tl, double makespan);

} // namespace hetmap
