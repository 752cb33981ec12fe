#include "tomigo/example_graphs.hpp"

#include <nlohmann/json.hpp>

namespace tomigo {

namespace {

constexpr const char* kMagicianCover = R"({
  "version": 1,
  "nodes": [
    {"id": "n1", "type": "Function", "description": "Cover for a cartoon-style book of magic tricks that invites readers to learn and perform them"},
    {"id": "n2", "type": "SubjectiveImpression", "description": "Playful, whimsical, energetic and magical mood"},
    {"id": "n3", "type": "ArtStyle", "description": "Cartoon illustration with comic book aesthetic bold outlines dynamic poses, vector style"},
    {"id": "n4", "type": "Narratives", "description": "Magic performance: a magician presenting tricks on stage"},
    {"id": "n5", "type": "Motifs", "description": "Main motif: magician figure centered, wearing a top hat and cape, performing a trick"},
    {"id": "n6", "type": "Motifs", "description": "Secondary motifs: magic props such as top hat, wand, rabbit and playing cards, with stars and sparkles"},
    {"id": "n7", "type": "Composition", "description": "Centered magician with props in a dynamic arrangement around the figure"},
    {"id": "n8", "type": "Typography", "description": "bold, dynamic sans-serif with outline for a comic-style title"},
    {"id": "n9", "type": "Colors", "description": "Bright saturated colors (red, blue, yellow, green, purple, pink, black, white) with contrasting costume and background"},
    {"id": "n10", "type": "Textures", "description": "Flat vector textures with sparkly effects"}
  ],
  "edges": [
    {"source": "n3", "target": "n1", "reason": "A cartoon look signals a fun, approachable trick book"},
    {"source": "n3", "target": "n2", "reason": "The comic aesthetic carries the playful mood"},
    {"source": "n4", "target": "n2", "reason": "A stage show evokes wonder and energy"},
    {"source": "n5", "target": "n4", "reason": "The performing magician embodies the magic show"},
    {"source": "n6", "target": "n4", "reason": "Props are the recognizable tools of a magic performance"},
    {"source": "n7", "target": "n5", "reason": "Centering makes the magician clearly identifiable"},
    {"source": "n8", "target": "n3", "reason": "Outlined comic lettering matches the comic book style"},
    {"source": "n9", "target": "n8", "reason": "A high-contrast palette keeps the outlined title readable"},
    {"source": "n9", "target": "n2", "reason": "Vibrant colors reinforce a playful mood"},
    {"source": "n10", "target": "n3", "reason": "Flat vector surfaces are typical of the cartoon style"}
  ]
})";

constexpr const char* kBirthdayCard = R"({
  "version": 1,
  "nodes": [
    {"id": "n1", "type": "Function", "description": "Invitation to a child's fifth birthday party listing date and place"},
    {"id": "n2", "type": "SubjectiveImpression", "description": "Cheerful, festive and light-hearted"},
    {"id": "n3", "type": "Motifs", "description": "Clusters of balloons and confetti framing the text"},
    {"id": "n4", "type": "VerbalElements", "description": "Large headline 'You're invited!' followed by party details"},
    {"id": "n5", "type": "Colors", "description": "Pastel pink, mint and sunny yellow on a white background"},
    {"id": "n6", "type": "Typography", "description": "Rounded hand-lettered headline with a simple sans-serif for details"}
  ],
  "edges": [
    {"source": "n3", "target": "n2", "reason": "Balloons and confetti are shorthand for a party"},
    {"source": "n4", "target": "n1", "reason": "The headline states what the card is for"},
    {"source": "n5", "target": "n2", "reason": "Soft pastels feel friendly and festive"},
    {"source": "n6", "target": "n4", "reason": "Rounded lettering gives the headline a playful voice"}
  ]
})";

constexpr const char* kJazzPoster = R"({
  "version": 1,
  "nodes": [
    {"id": "n1", "type": "Function", "description": "Poster announcing an evening jazz festival to adult city audiences"},
    {"id": "n2", "type": "ArtStyle", "description": "Mid-century modern screen print with flat geometric shapes"},
    {"id": "n3", "type": "Narratives", "description": "Late-night club atmosphere and improvisation"},
    {"id": "n4", "type": "Motifs", "description": "Abstracted saxophone silhouette built from overlapping shapes"},
    {"id": "n5", "type": "Composition", "description": "Large motif on the left, stacked type block on the right"},
    {"id": "n6", "type": "Textures", "description": "Grainy print texture with slight misregistration"}
  ],
  "edges": [
    {"source": "n2", "target": "n1", "reason": "A classic print look suits a cultural event poster"},
    {"source": "n4", "target": "n3", "reason": "The saxophone is the emblem of jazz nights"},
    {"source": "n5", "target": "n4", "reason": "The asymmetric layout gives the silhouette room to dominate"},
    {"source": "n6", "target": "n2", "reason": "Grain and misregistration recall screen printing"}
  ]
})";

constexpr const char* kBakeryLogo = R"({
  "version": 1,
  "nodes": [
    {"id": "n1", "type": "Function", "description": "Logo for a neighborhood sourdough bakery used on signage and bags"},
    {"id": "n2", "type": "SubjectiveImpression", "description": "Warm, artisanal and trustworthy"},
    {"id": "n3", "type": "Motifs", "description": "Simple wheat stalk drawn inside a circular badge"},
    {"id": "n4", "type": "Colors", "description": "Warm brown and cream, two colors only"},
    {"id": "n5", "type": "Typography", "description": "Serif wordmark with slightly irregular hand-cut edges"}
  ],
  "edges": [
    {"source": "n3", "target": "n1", "reason": "Wheat directly names the product"},
    {"source": "n4", "target": "n2", "reason": "Bread-like browns feel warm and natural"},
    {"source": "n5", "target": "n2", "reason": "Hand-cut serifs suggest craft"},
    {"source": "n4", "target": "n5", "reason": "The two-tone palette keeps the wordmark legible on bags"}
  ]
})";

ConceptGraph parse(const char* text) { return graph_from_json(nlohmann::json::parse(text)); }

}  // namespace

const std::vector<ExampleGraph>& bundled_example_graphs() {
    static const std::vector<ExampleGraph> graphs = {
        {"Magician book cover", parse(kMagicianCover)},
        {"Birthday invitation card (engine-authored)", parse(kBirthdayCard)},
        {"Jazz festival poster (engine-authored)", parse(kJazzPoster)},
        {"Bakery logo (engine-authored)", parse(kBakeryLogo)},
    };
    return graphs;
}

}  // namespace tomigo
