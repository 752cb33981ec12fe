#pragma once

#include <string>
#include <vector>

#include "tomigo/graph.hpp"

namespace tomigo {

struct ExampleGraph {
    std::string title;
    ConceptGraph graph;
};

// Example concept graphs shown to the provider during image analysis. The
// magician book cover is the reference scenario; the other three are
// engine-authored analogs.
const std::vector<ExampleGraph>& bundled_example_graphs();

}  // namespace tomigo
