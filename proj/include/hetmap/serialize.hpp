#pragma once

#include <string>

#include "hetmap/appgraph.hpp"
#include "hetmap/evaluator.hpp"
#include "hetmap/platform.hpp"
#include "hetmap/timing.hpp"

namespace hetmap {

// JSON round trips. Writers emit two-space-indented, key-sorted documents so
// identical inputs serialize to identical bytes; readers reject malformed or
// unknown content with descriptive errors.

std::string graph_to_json(const AppGraph& g);
AppGraph graph_from_json(const std::string& text);

std::string platform_to_json(const Platform& pf);
Platform platform_from_json(const std::string& text);

std::string timing_to_json(const TimingModel& tm);
TimingModel timing_from_json(const std::string& text);

std::string mapping_to_json(const Mapping& m);
Mapping mapping_from_json(const std::string& text);

std::string timeline_to_json(const Timeline& tl, double makespan);
std::pair<Timeline, double> timeline_from_json(const std::string& text);

} // namespace hetmap
