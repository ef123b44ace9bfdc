#include "residue_lab/runner/pins.hpp"

#include <fstream>

#include "residue_lab/error.hpp"

namespace residue_lab::runner {

const PinEntry* PinManifest::find(const std::string& id) const {
  for (const auto& p : pins) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

Json PinManifest::to_json() const {
  Json doc = Json::object();
  doc["margin"] = margin;
  Json list = Json::array();
  for (const auto& p : pins) {
    list.push_back({{"id", p.id}, {"kind", p.kind == PinKind::max ? "max" : "min"}, {"value", p.value},
                    {"where", p.where}});
  }
  doc["pins"] = list;
  return doc;
}

PinManifest PinManifest::from_json(const Json& doc) {
  try {
    PinManifest m;
    if (doc.contains("margin")) m.margin = doc.at("margin").get<double>();
    for (const auto& p : doc.at("pins")) {
      PinEntry e;
      e.id = p.at("id").get<std::string>();
      const auto kind = p.at("kind").get<std::string>();
      if (kind != "max" && kind != "min") throw ConfigError("pin " + e.id + " has kind '" + kind + "'");
      e.kind = kind == "max" ? PinKind::max : PinKind::min;
      e.value = p.at("value").get<double>();
      if (p.contains("where")) e.where = p.at("where");
      m.pins.push_back(std::move(e));
    }
    return m;
  } catch (const Json::exception& err) {
    throw ConfigError(std::string("pin manifest: ") + err.what());
  }
}

PinManifest PinManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--pins: cannot open " + path);
  try {
    return from_json(Json::parse(in));
  } catch (const Json::exception& err) {
    throw ConfigError("--pins: " + path + " is not valid JSON (" + err.what() + ")");
  }
}

void PinManifest::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write pin manifest to " + path);
  out << to_json().dump(2) << '\n';
}

bool pin_respected(const PinEntry& pin, double observed, double margin) {
  if (pin.kind == PinKind::max) return observed <= pin.value * (1 + margin);
  return observed >= pin.value * (1 - margin);
}

}  // namespace residue_lab::runner
