#include <map>

#include "gosprl/error.hpp"
#include "gosprl/mdp.hpp"

namespace gosprl {

namespace {

const std::map<std::string, std::string>& layouts() {
  static const std::map<std::string, std::string> table = {
      {"corridor24", "T..S...................T\n"},
      {"four_room43",
       "S...#...\n"
       "....#...\n"
       "........\n"
       "###.###.\n"
       "#...#...\n"
       "#...#...\n"
       "#......T\n"},
  };
  return table;
}

}  // namespace

const std::string& builtin_layout(const std::string& name) {
  const auto it = layouts().find(name);
  if (it == layouts().end()) throw ParameterError("unknown built-in layout '" + name + "'");
  return it->second;
}

std::vector<std::string> builtin_layout_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : layouts()) out.push_back(name);
  return out;
}

}  // namespace gosprl
