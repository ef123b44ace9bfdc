#include "residue_lab/runner/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "residue_lab/error.hpp"

namespace residue_lab::runner {

namespace {

const std::set<std::string> kKnownKeys = {
    "q",         "q-family", "q-range", "offsets", "h",        "h-grid",     "k",       "lambda",
    "centering", "x",        "bounds",  "system",  "corpus",   "out",        "format",  "pins",
    "mem-budget", "term-budget", "threads", "no-timing", "sweeps"};

const std::vector<std::string> kModulusKeys = {"q", "q-family", "q-range"};
const std::vector<std::string> kWindowKeys = {"h", "h-grid"};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError("--" + field + ": " + message);
}

template <typename T>
T parse_int(const std::string& field, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(field, "'" + text + "' is not a valid integer");
  }
  return v;
}

double parse_real(const std::string& field, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    fail(field, "'" + text + "' is not a number");
  }
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& field, const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) fail(field, "expected a..b, got '" + text + "'");
  const auto lo = parse_int<std::uint64_t>(field, trim(text.substr(0, dots)));
  const auto hi = parse_int<std::uint64_t>(field, trim(text.substr(dots + 2)));
  if (lo > hi) fail(field, "empty range " + text);
  return {lo, hi};
}

template <typename T>
std::vector<T> parse_int_list(const std::string& field, const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_int<T>(field, item));
  return out;
}

std::string json_scalar(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return format_double(v.get<double>());
  throw ConfigError("config key '" + key + "' must be a string, number, boolean or array of those");
}

bool parse_bool(const std::string& field, const std::string& text) {
  if (text == "true" || text == "1" || text.empty()) return true;
  if (text == "false" || text == "0") return false;
  fail(field, "expected true or false, got '" + text + "'");
}

}  // namespace

RawConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config: cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError("--config: " + path + " is not valid JSON (" + err.what() + ")");
  }
  if (!doc.is_object()) throw ConfigError("--config: top level must be an object");
  RawConfig out;
  for (const auto& [key, value] : doc.items()) {
    if (!kKnownKeys.count(key)) throw ConfigError("--config: unknown key '" + key + "'");
    if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ',';
        joined += json_scalar(item, key);
      }
      out[key] = joined;
    } else {
      out[key] = json_scalar(value, key);
    }
  }
  return out;
}

RawConfig merge(const RawConfig& base, const RawConfig& over) {
  RawConfig out = base;
  // A modulus or window choice in a later layer replaces every earlier form of it.
  for (const auto* group : {&kModulusKeys, &kWindowKeys}) {
    std::vector<std::string> given;
    for (const auto& k : *group) {
      if (over.count(k)) given.push_back(k);
    }
    if (given.size() > 1) {
      throw ConfigError("--" + given[0] + ": conflicts with --" + given[1] + " in the same layer; give only one");
    }
    if (!given.empty()) {
      for (const auto& k : *group) out.erase(k);
    }
  }
  for (const auto& [k, v] : over) out[k] = v;
  return out;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"verify-identities", "moments",     "gaps",         "squares",
                                                 "omega-sets",        "corollary1", "bounds-sweep", "pin"};
  return names;
}

HGrid HGrid::parse(const std::string& raw) {
  HGrid g;
  g.text = trim(raw);
  if (g.text == "log2") {
    g.kind = Kind::log2;
  } else if (g.text == "pinv") {
    g.kind = Kind::pinv;
  } else if (g.text.find("..") != std::string::npos) {
    g.kind = Kind::range;
    std::tie(g.lo, g.hi) = parse_range("h-grid", g.text);
    if (g.lo == 0) fail("h-grid", "window lengths start at 1");
  } else {
    g.kind = Kind::list;
    g.values = parse_int_list<std::uint64_t>("h-grid", g.text);
    if (std::find(g.values.begin(), g.values.end(), 0) != g.values.end()) fail("h-grid", "window lengths start at 1");
  }
  return g;
}

std::vector<std::uint64_t> HGrid::resolve(const SquarefreeModulus& q) const {
  switch (kind) {
    case Kind::list:
      return values;
    case Kind::range: {
      std::vector<std::uint64_t> out;
      for (std::uint64_t h = lo; h <= hi; ++h) out.push_back(h);
      return out;
    }
    case Kind::log2: {
      std::vector<std::uint64_t> out;
      for (std::uint64_t h = 1; h < q.value(); h *= 2) out.push_back(h);
      out.push_back(q.value());
      return out;
    }
    case Kind::pinv: {
      const mpz_class qz = to_mpz(q.value()), phi = to_mpz(q.phi());
      mpz_class one, ten;
      mpz_cdiv_q(one.get_mpz_t(), qz.get_mpz_t(), phi.get_mpz_t());
      const mpz_class ten_q = 10 * qz;
      mpz_cdiv_q(ten.get_mpz_t(), ten_q.get_mpz_t(), phi.get_mpz_t());
      return {one.get_ui(), ten.get_ui()};
    }
  }
  return {};
}

RawConfig default_config(const std::string& experiment) {
  RawConfig d = {{"format", "json"}, {"out", "-"}, {"mem-budget", std::to_string(std::uint64_t{1} << 31)},
                 {"term-budget", "200000000"}, {"centering", "exact"}, {"k", "2"}, {"lambda", "2"},
                 {"offsets", "0"}, {"h-grid", "log2"}, {"bounds", "all"}, {"x", "20,50"}, {"corpus", "singleton"}};
  if (experiment == "verify-identities") {
    d["q-range"] = "1..210";
    d["offsets"] = "0;0,2;0,2,6";
  } else if (experiment == "moments") {
    d["q"] = "15";
    d["offsets"] = "0,2";
    d["h-grid"] = "4";
  } else if (experiment == "gaps") {
    d["q-family"] = "primorial:6";
  } else if (experiment == "squares") {
    d["q"] = "15";
    d["h-grid"] = "4";
  } else if (experiment == "omega-sets") {
    d["q-range"] = "3..200";
  } else if (experiment == "bounds-sweep") {
    d["q-family"] = "primorial:5";
    d["offsets"] = "0,2";
    d["h-grid"] = "pinv";
    d["k"] = "2,4";
  }
  if (experiment == "pin") d["sweeps"] = "all";
  return d;
}

ExperimentConfig resolve_config(const std::string& experiment, const RawConfig& raw,
                                const std::optional<std::string>& threads_env) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  for (const auto& [k, v] : raw) {
    if (!kKnownKeys.count(k)) throw ConfigError("unknown setting '" + k + "'");
  }
  const auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = raw.find(key);
    if (it == raw.end()) return std::nullopt;
    return it->second;
  };

  ExperimentConfig c;
  c.experiment = experiment;

  if (auto v = get("q")) {
    c.q_text = "q=" + *v;
    c.qs = parse_int_list<std::uint64_t>("q", *v);
  } else if (auto v = get("q-family")) {
    c.q_text = "q-family=" + *v;
    const auto colon = v->find(':');
    if (colon == std::string::npos || trim(v->substr(0, colon)) != "primorial") {
      fail("q-family", "expected primorial:N, got '" + *v + "'");
    }
    const auto n = parse_int<std::size_t>("q-family", trim(v->substr(colon + 1)));
    if (n == 0 || n > 15) fail("q-family", "primorial index must lie in [1, 15]");
    for (std::size_t i = 1; i <= n; ++i) c.qs.push_back(primorial(i).value());
  } else if (auto v = get("q-range")) {
    c.q_text = "q-range=" + *v;
    const auto [lo, hi] = parse_range("q-range", *v);
    if (lo == 0) fail("q-range", "moduli start at 1");
    if (hi - lo > 10'000'000) fail("q-range", "range too long");
    c.qs = squarefree_in_range(lo, hi);
  }
  for (auto q : c.qs) {
    if (q == 0) fail("q", "moduli must be positive");
    if (!is_squarefree(q)) fail("q", std::to_string(q) + " is not squarefree");
  }

  if (auto v = get("offsets")) {
    for (const auto& set : split(*v, ';')) {
      auto values = parse_int_list<std::int64_t>("offsets", set);
      try {
        c.offsets.push_back(OffsetSet(values).offsets());
      } catch (const Error& err) {
        fail("offsets", err.what());
      }
    }
  }

  if (auto v = get("h")) {
    c.h = HGrid::parse(*v);
  } else if (auto v = get("h-grid")) {
    c.h = HGrid::parse(*v);
  }

  if (auto v = get("k")) {
    for (auto k : parse_int_list<unsigned>("k", *v)) {
      if (k < 1 || k > kMaxMomentOrder) fail("k", "orders must lie in [1, 8]");
      c.ks.push_back(k);
    }
  }
  if (auto v = get("lambda")) {
    for (const auto& item : split(*v, ',')) {
      const double l = parse_real("lambda", item);
      if (!(l >= 1)) fail("lambda", "values must be at least 1");
      c.lambdas.push_back(l);
    }
  }
  if (auto v = get("centering")) {
    try {
      c.centering = parse_centering(*v);
    } catch (const Error& err) {
      fail("centering", err.what());
    }
  }
  if (auto v = get("x")) c.xs = parse_int_list<std::uint64_t>("x", *v);
  if (auto v = get("bounds")) {
    if (*v == "all") {
      c.bounds = {BoundKind::lemma12,       BoundKind::lemma21,        BoundKind::lemma31,
                  BoundKind::thm42_small_h, BoundKind::thm42_general, BoundKind::mv_mu_k};
    } else {
      for (const auto& item : split(*v, ',')) {
        try {
          c.bounds.push_back(parse_bound_kind(item));
        } catch (const Error& err) {
          fail("bounds", err.what());
        }
      }
    }
  }
  if (auto v = get("system")) c.system_path = *v;
  if (auto v = get("corpus")) {
    if (*v != "singleton" && *v != "qr" && *v != "random") fail("corpus", "expected singleton, qr or random");
    c.corpus = *v;
  }
  if (auto v = get("sweeps")) {
    if (*v != "all" && *v != "none") {
      for (const auto& item : split(*v, ',')) c.sweeps.push_back(trim(item));
    } else if (*v == "all") {
      c.sweeps = {""};
    }
  }
  if (auto v = get("out")) c.out = *v;
  if (auto v = get("format")) c.format = parse_format(*v);
  if (auto v = get("pins")) c.pins = *v;
  if (auto v = get("mem-budget")) {
    c.options.memory_budget_bits = parse_int<std::uint64_t>("mem-budget", *v);
    if (c.options.memory_budget_bits == 0) fail("mem-budget", "must be positive");
  }
  if (auto v = get("term-budget")) {
    c.options.term_budget = parse_int<std::uint64_t>("term-budget", *v);
    if (c.options.term_budget == 0) fail("term-budget", "must be positive");
  }
  if (auto v = get("threads")) {
    c.options.threads = parse_int<unsigned>("threads", *v);
  } else if (threads_env && !threads_env->empty()) {
    try {
      c.options.threads = parse_int<unsigned>("threads", *threads_env);
    } catch (const ConfigError&) {
      throw ConfigError("RESIDUE_LAB_THREADS: '" + *threads_env + "' is not a valid integer");
    }
  }
  if (c.options.threads == 0) fail("threads", "must be at least 1");
  if (auto v = get("no-timing")) c.timing = !parse_bool("no-timing", *v);
  return c;
}

Json ExperimentConfig::to_json() const {
  Json j = Json::object();
  j["experiment"] = experiment;
  j["moduli"] = q_text;
  j["q"] = qs;
  j["offsets"] = offsets;
  j["h_grid"] = h.text;
  j["k"] = ks;
  j["lambda"] = lambdas;
  j["centering"] = to_string(centering);
  j["x"] = xs;
  Json b = Json::array();
  for (auto kind : bounds) b.push_back(to_string(kind));
  j["bounds"] = b;
  j["system"] = system_path;
  j["corpus"] = corpus;
  j["format"] = format == Format::csv ? "csv" : "json";
  j["pins"] = pins;
  j["sweeps"] = sweeps;
  j["mem_budget_bits"] = options.memory_budget_bits;
  j["term_budget"] = options.term_budget;
  j["threads"] = options.threads;
  j["timing"] = timing;
  return j;
}

}  // namespace residue_lab::runner
