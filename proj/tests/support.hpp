#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "beyond/content.hpp"
#include "beyond/quest.hpp"

namespace beyond::test {

inline const std::string kContentDir = BEYOND_CONTENT_DIR;

inline const ContentPack& content() {
  static const ContentPack pack = load_content(kContentDir + "/content_pack.json");
  return pack;
}

inline const Scenario& escape_room() {
  static const Scenario s = load_scenario(kContentDir + "/escape_room.json", content());
  return s;
}

inline WallConstruction make_wall(StructuralSystem system, const std::vector<std::pair<std::string, double>>& layers) {
  WallConstruction w;
  w.system = system;
  for (const auto& [id, d] : layers) w.layers.push_back({content().material(id), d});
  return w;
}

// Plaster, brick, 16 cm EPS, render: the textbook masonry wall.
inline WallConstruction reference_wall(double eps = 0.16) {
  return make_wall(StructuralSystem::Masonry,
                   {{"lime_plaster", 0.015}, {"clay_brick", 0.25}, {"eps", eps}, {"mineral_render", 0.004}});
}

inline Material plain_material(double lambda, double mu = 1.0, double cost = 0.0) {
  Material m;
  m.id = "test";
  m.category = Category::Structural;
  m.structural_system = StructuralSystem::Masonry;
  m.conductivity = lambda;
  m.vapor_resistance = mu;
  m.unit_cost = cost;
  m.max_thickness = 2.0;
  return m;
}

inline std::vector<Action> golden_script() {
  std::ifstream in(kContentDir + "/golden_playthrough.txt");
  return parse_script(in);
}

}  // namespace beyond::test
