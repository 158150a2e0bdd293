#ifndef GREEDYPOSE_IO_HPP
#define GREEDYPOSE_IO_HPP

// JSON interchange formats: detections, poses, ground truth, configuration
// and reports.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"

#include "greedypose/assignment.hpp"
#include "greedypose/eval.hpp"
#include "greedypose/synthgen.hpp"

namespace gpose::io {

using nlohmann::json;

/// Rejected input. The message starts with "<source>:<line>:" when the
/// offending location is known.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps the JSON pointer of every value in `text` to the 1-based line on
/// which it starts. Only used to anchor error messages.
inline std::unordered_map<std::string, int> value_lines(std::string_view text) {
  struct Frame {
    bool array;
    std::size_t index = 0;
    std::string key;
    bool expect_key = true;
  };
  std::unordered_map<std::string, int> out;
  std::vector<Frame> stack;
  int line = 1;
  std::size_t i = 0;

  auto pointer = [&]() {
    std::string p;
    for (const Frame& f : stack) p += "/" + (f.array ? std::to_string(f.index) : f.key);
    return p;
  };
  auto read_string = [&]() {
    std::string s;
    ++i;  // opening quote
    while (i < text.size() && text[i] != '"') {
      if (text[i] == '\\' && i + 1 < text.size()) {
        s += text[i + 1];
        i += 2;
        continue;
      }
      if (text[i] == '\n') ++line;
      s += text[i++];
    }
    ++i;  // closing quote
    return s;
  };

  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == ':') {
      ++i;
      continue;
    }
    if (c == ',') {
      if (!stack.empty()) {
        if (stack.back().array) {
          ++stack.back().index;
        } else {
          stack.back().expect_key = true;
        }
      }
      ++i;
      continue;
    }
    if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
      ++i;
      continue;
    }
    if (!stack.empty() && !stack.back().array && stack.back().expect_key) {
      if (c != '"') return out;  // malformed; the parser reports it
      stack.back().key = read_string();
      stack.back().expect_key = false;
      continue;
    }
    out.emplace(pointer(), line);
    if (c == '{') {
      stack.push_back(Frame{false, 0, {}, true});
      ++i;
    } else if (c == '[') {
      stack.push_back(Frame{true, 0, {}, true});
      ++i;
    } else if (c == '"') {
      read_string();
    } else {
      while (i < text.size() && text[i] != ',' && text[i] != '}' && text[i] != ']' &&
             text[i] != '\n' && text[i] != ' ' && text[i] != '\t' && text[i] != '\r') {
        ++i;
      }
    }
  }
  return out;
}

namespace detail {

// Error context for one document: resolves JSON pointers to line numbers
// lazily, only when an error is raised.
class Context {
 public:
  Context(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    int line = 0;
    if (!text_.empty()) {
      const auto lines = value_lines(text_);
      std::string p = pointer;
      while (true) {
        auto it = lines.find(p);
        if (it != lines.end()) {
          line = it->second;
          break;
        }
        if (p.empty()) break;
        p.erase(p.rfind('/'));
      }
    }
    std::string prefix = source_;
    if (line > 0) prefix += ":" + std::to_string(line);
    throw ValidationError(prefix + ": " + message);
  }

 private:
  std::string_view text_;
  std::string source_;
};

inline json parse_text(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) {
      line += text[i] == '\n';
    }
    throw ValidationError(source + ":" + std::to_string(line) + ": malformed JSON (" +
                          e.what() + ")");
  }
}

inline const json& member(const Context& ctx, const json& obj, const std::string& ptr,
                          const char* key) {
  if (!obj.is_object()) ctx.fail(ptr, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) ctx.fail(ptr, std::string("missing field \"") + key + "\"");
  return *it;
}

inline double number(const Context& ctx, const json& v, const std::string& ptr) {
  if (!v.is_number()) ctx.fail(ptr, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) ctx.fail(ptr, "expected a finite number");
  return d;
}

inline std::uint64_t unsigned_integer(const Context& ctx, const json& v, const std::string& ptr) {
  if (!v.is_number_unsigned()) ctx.fail(ptr, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline bool boolean(const Context& ctx, const json& v, const std::string& ptr) {
  if (!v.is_boolean()) ctx.fail(ptr, "expected true or false");
  return v.get<bool>();
}

inline PartClass part_class(const Context& ctx, const json& v, const std::string& ptr) {
  if (!v.is_string()) ctx.fail(ptr, "expected a part class name");
  auto p = parse_part(v.get<std::string>());
  if (!p) ctx.fail(ptr, "unknown part class \"" + v.get<std::string>() + "\"");
  return *p;
}

inline void only_keys(const Context& ctx, const json& obj, const std::string& ptr,
                      std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) ctx.fail(ptr, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || a == k;
    if (!ok) ctx.fail(ptr + "/" + k, "unknown field \"" + k + "\"");
  }
}

inline json point_json(Point p) { return {{"x", p.x}, {"y", p.y}}; }

inline Point point(const Context& ctx, const json& v, const std::string& ptr) {
  return {number(ctx, member(ctx, v, ptr, "x"), ptr + "/x"),
          number(ctx, member(ctx, v, ptr, "y"), ptr + "/y")};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Configuration

inline json to_json(const AssignmentConfig& c) {
  return {
      {"head_nms_threshold", c.head_nms_threshold},
      {"spawn_threshold", c.spawn_threshold},
      {"hallucination_threshold", c.hallucination_threshold},
      {"radius_multiplier", c.radius_multiplier},
      {"kmeans_iterations", c.kmeans_iterations},
      {"extra_clusters", c.extra_clusters},
      {"rng_seed", c.rng_seed},
      {"enable_proximal_gating", c.enable_proximal_gating},
      {"enable_candidate_clustering", c.enable_candidate_clustering},
      {"enable_predecessor_subsets", c.enable_predecessor_subsets},
      {"enable_spawning", c.enable_spawning},
      {"enable_suppression", c.enable_suppression},
  };
}

inline json to_json(const Tables& t) {
  json alpha = json::object();
  alpha["Chin"] = t.anthropometry.chin_alpha;
  for (PartClass p : chain_order()) alpha[std::string(name(p))] = t.anthropometry[p];
  json preds = json::object();
  for (PartClass p : chain_order()) {
    json row = json::array();
    for (PartClass q : t.predecessors[p]) row.push_back(std::string(name(q)));
    preds[std::string(name(p))] = row;
  }
  return {{"anthropometric", alpha}, {"predecessors", preds}};
}

/// Applies the fields present in `j` on top of `config` and `tables`.
/// Unknown keys are rejected.
inline void apply_config(const json& j, AssignmentConfig& config, Tables& tables,
                         std::string_view text = {}, const std::string& source = "config") {
  const detail::Context ctx(text, source);
  if (!j.is_object()) ctx.fail("", "configuration must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    const std::string ptr = "/" + key;
    auto prob = [&](double& dst) {
      dst = detail::number(ctx, v, ptr);
      if (!(dst >= 0.0 && dst <= 1.0)) ctx.fail(ptr, key + " must lie in [0,1]");
    };
    auto count = [&](int& dst) {
      if (!v.is_number_integer()) ctx.fail(ptr, key + " must be an integer");
      dst = v.get<int>();
    };
    if (key == "head_nms_threshold") {
      prob(config.head_nms_threshold);
    } else if (key == "spawn_threshold") {
      prob(config.spawn_threshold);
    } else if (key == "hallucination_threshold") {
      prob(config.hallucination_threshold);
    } else if (key == "radius_multiplier") {
      config.radius_multiplier = detail::number(ctx, v, ptr);
    } else if (key == "kmeans_iterations") {
      count(config.kmeans_iterations);
    } else if (key == "extra_clusters") {
      count(config.extra_clusters);
    } else if (key == "rng_seed") {
      config.rng_seed = detail::unsigned_integer(ctx, v, ptr);
    } else if (key == "enable_proximal_gating") {
      config.enable_proximal_gating = detail::boolean(ctx, v, ptr);
    } else if (key == "enable_candidate_clustering") {
      config.enable_candidate_clustering = detail::boolean(ctx, v, ptr);
    } else if (key == "enable_predecessor_subsets") {
      config.enable_predecessor_subsets = detail::boolean(ctx, v, ptr);
    } else if (key == "enable_spawning") {
      config.enable_spawning = detail::boolean(ctx, v, ptr);
    } else if (key == "enable_suppression") {
      config.enable_suppression = detail::boolean(ctx, v, ptr);
    } else if (key == "anthropometric") {
      if (!v.is_object()) ctx.fail(ptr, "anthropometric must be an object");
      for (const auto& [part, a] : v.items()) {
        const double value = detail::number(ctx, a, ptr + "/" + part);
        if (part == "Chin") {
          tables.anthropometry.chin_alpha = value;
          continue;
        }
        auto p = parse_part(part);
        if (!p) ctx.fail(ptr + "/" + part, "unknown part class \"" + part + "\"");
        tables.anthropometry.alpha[slot(*p)] = value;
      }
    } else if (key == "predecessors") {
      if (!v.is_object()) ctx.fail(ptr, "predecessors must be an object");
      for (const auto& [part, row] : v.items()) {
        const std::string rp = ptr + "/" + part;
        auto p = parse_part(part);
        if (!p) ctx.fail(rp, "unknown part class \"" + part + "\"");
        if (!row.is_array()) ctx.fail(rp, "predecessor row must be an array");
        std::vector<PartClass> list;
        for (std::size_t i = 0; i < row.size(); ++i) {
          list.push_back(detail::part_class(ctx, row[i], rp + "/" + std::to_string(i)));
        }
        tables.predecessors.preds[slot(*p)] = std::move(list);
      }
    } else {
      ctx.fail(ptr, "unknown configuration field \"" + key + "\"");
    }
  }
  try {
    config.validate();
    tables.anthropometry.validate();
    tables.predecessors.validate();
  } catch (const std::invalid_argument& e) {
    ctx.fail("", e.what());
  }
}

inline void load_config(std::string_view text, const std::string& source,
                        AssignmentConfig& config, Tables& tables) {
  apply_config(detail::parse_text(text, source), config, tables, text, source);
}

// ---------------------------------------------------------------------------
// Detections

struct GeometricSpec {
  double head_length = 0.0;
  double pairwise_sigma = 0.0;

  friend bool operator==(const GeometricSpec&, const GeometricSpec&) = default;
};

struct DetectionsDocument {
  double width = 0.0;
  double height = 0.0;
  Detections detections;
  std::variant<SparseAssociation, GeometricSpec> association;
  std::optional<std::uint64_t> seed;
};

inline std::unique_ptr<AssociationProvider> make_association(const DetectionsDocument& doc,
                                                              const Tables& tables = {}) {
  if (const auto* g = std::get_if<GeometricSpec>(&doc.association)) {
    return std::make_unique<GeometricAssociation>(g->head_length, g->pairwise_sigma,
                                                  tables.anthropometry);
  }
  return std::make_unique<SparseAssociation>(std::get<SparseAssociation>(doc.association));
}

inline json candidate_json(const Candidate& c) {
  return {{"id", c.id}, {"class", std::string(name(c.part))}, {"x", c.pos.x}, {"y", c.pos.y},
          {"unary", c.unary}};
}

inline json to_json(const DetectionsDocument& doc) {
  json cands = json::array();
  for (const Candidate& c : doc.detections.all()) cands.push_back(candidate_json(c));
  json assoc;
  if (const auto* g = std::get_if<GeometricSpec>(&doc.association)) {
    assoc["geometric"] = {{"head_length", g->head_length}, {"pairwise_sigma", g->pairwise_sigma}};
  } else {
    std::vector<std::tuple<CandidateId, CandidateId, double>> entries;
    std::get<SparseAssociation>(doc.association).for_each([&](CandidateId a, CandidateId b, double p) {
      entries.emplace_back(a, b, p);
    });
    std::sort(entries.begin(), entries.end());
    json sparse = json::array();
    for (const auto& [a, b, p] : entries) sparse.push_back({{"a", a}, {"b", b}, {"p", p}});
    assoc["sparse"] = sparse;
  }
  json out = {{"image", {{"width", doc.width}, {"height", doc.height}}},
              {"candidates", cands},
              {"associations", assoc}};
  if (doc.seed) out["seed"] = *doc.seed;
  return out;
}

inline DetectionsDocument parse_detections(std::string_view text,
                                           const std::string& source = "detections") {
  const json j = detail::parse_text(text, source);
  const detail::Context ctx(text, source);
  detail::only_keys(ctx, j, "", {"image", "candidates", "associations", "seed"});
  DetectionsDocument doc;

  const json& image = detail::member(ctx, j, "", "image");
  detail::only_keys(ctx, image, "/image", {"width", "height"});
  doc.width = detail::number(ctx, detail::member(ctx, image, "/image", "width"), "/image/width");
  doc.height = detail::number(ctx, detail::member(ctx, image, "/image", "height"), "/image/height");
  if (doc.width < 0.0 || doc.height < 0.0) ctx.fail("/image", "image extent must be non-negative");
  if (j.contains("seed")) doc.seed = detail::unsigned_integer(ctx, j["seed"], "/seed");

  const json& cands = detail::member(ctx, j, "", "candidates");
  if (!cands.is_array()) ctx.fail("/candidates", "candidates must be an array");
  std::set<CandidateId> ids;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const std::string ptr = "/candidates/" + std::to_string(i);
    const json& c = cands[i];
    detail::only_keys(ctx, c, ptr, {"id", "class", "x", "y", "unary"});
    Candidate cand;
    cand.id = detail::unsigned_integer(ctx, detail::member(ctx, c, ptr, "id"), ptr + "/id");
    const std::string who = "candidate " + std::to_string(cand.id) + ": ";
    if (!ids.insert(cand.id).second) ctx.fail(ptr + "/id", who + "duplicate id");
    const json& cls = detail::member(ctx, c, ptr, "class");
    if (!cls.is_string() || !parse_part(cls.get<std::string>())) {
      ctx.fail(ptr + "/class", who + "unknown part class " + cls.dump());
    }
    cand.part = *parse_part(cls.get<std::string>());
    cand.pos.x = detail::number(ctx, detail::member(ctx, c, ptr, "x"), ptr + "/x");
    cand.pos.y = detail::number(ctx, detail::member(ctx, c, ptr, "y"), ptr + "/y");
    const json& u = detail::member(ctx, c, ptr, "unary");
    if (!u.is_number()) ctx.fail(ptr + "/unary", who + "unary must be a number");
    cand.unary = u.get<double>();
    if (!(cand.unary >= 0.0 && cand.unary <= 1.0)) {
      ctx.fail(ptr + "/unary", who + "unary probability " + u.dump() + " outside [0,1]");
    }
    doc.detections.add(cand);
  }

  const json& assoc = detail::member(ctx, j, "", "associations");
  if (!assoc.is_object() || assoc.size() != 1) {
    ctx.fail("/associations", "associations must hold exactly one of \"sparse\" or \"geometric\"");
  }
  if (assoc.contains("geometric")) {
    const json& g = assoc["geometric"];
    const std::string ptr = "/associations/geometric";
    detail::only_keys(ctx, g, ptr, {"head_length", "pairwise_sigma"});
    GeometricSpec spec;
    spec.head_length =
        detail::number(ctx, detail::member(ctx, g, ptr, "head_length"), ptr + "/head_length");
    spec.pairwise_sigma =
        detail::number(ctx, detail::member(ctx, g, ptr, "pairwise_sigma"), ptr + "/pairwise_sigma");
    if (!(spec.head_length > 0.0)) ctx.fail(ptr + "/head_length", "head_length must be positive");
    if (!(spec.pairwise_sigma > 0.0)) {
      ctx.fail(ptr + "/pairwise_sigma", "pairwise_sigma must be positive");
    }
    doc.association = spec;
  } else if (assoc.contains("sparse")) {
    const json& s = assoc["sparse"];
    if (!s.is_array()) ctx.fail("/associations/sparse", "sparse associations must be an array");
    SparseAssociation table;
    std::map<std::pair<CandidateId, CandidateId>, double> seen;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string ptr = "/associations/sparse/" + std::to_string(i);
      detail::only_keys(ctx, s[i], ptr, {"a", "b", "p"});
      const CandidateId a = detail::unsigned_integer(ctx, detail::member(ctx, s[i], ptr, "a"), ptr + "/a");
      const CandidateId b = detail::unsigned_integer(ctx, detail::member(ctx, s[i], ptr, "b"), ptr + "/b");
      const double p = detail::number(ctx, detail::member(ctx, s[i], ptr, "p"), ptr + "/p");
      if (!ids.count(a) || !ids.count(b)) {
        ctx.fail(ptr, "association refers to unknown candidate " + std::to_string(ids.count(a) ? b : a));
      }
      if (!(p >= 0.0 && p <= 1.0)) {
        ctx.fail(ptr + "/p", "association between " + std::to_string(a) + " and " +
                                 std::to_string(b) + " outside [0,1]");
      }
      const auto key = std::minmax(a, b);
      auto [it, fresh] = seen.emplace(key, p);
      if (!fresh && it->second != p) {
        ctx.fail(ptr, "conflicting associations between " + std::to_string(a) + " and " +
                          std::to_string(b));
      }
      table.set(a, b, p);
    }
    doc.association = std::move(table);
  } else {
    ctx.fail("/associations", "associations must hold exactly one of \"sparse\" or \"geometric\"");
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Poses

struct PosesDocument {
  AssignmentResult result;
  AssignmentConfig config;
  Tables tables;
};

inline json to_json(const AssignmentResult& r, const AssignmentConfig& config,
                    const Tables& tables = {}) {
  json clusters = json::array();
  for (const PersonCluster& c : r.clusters) {
    json parts = json::object();
    for (const auto& p : c.parts) {
      if (!p) continue;
      parts[std::string(name(p->candidate.part))] = {
          {"candidate_id", p->candidate.id}, {"x", p->candidate.pos.x},
          {"y", p->candidate.pos.y},         {"unary", p->candidate.unary},
          {"affinity", p->affinity},         {"anchor", p->anchor}};
    }
    clusters.push_back({{"id", c.id},
                        {"spawned", c.spawned},
                        {"anchor", detail::point_json(c.anchor)},
                        {"parts", parts}});
  }
  json unassigned = json::array();
  for (const Candidate& c : r.unassigned) unassigned.push_back(candidate_json(c));
  json suppressed = json::array();
  for (const SuppressedPart& s : r.suppressed) {
    json e = candidate_json(s.candidate);
    e.erase("id");
    e["candidate_id"] = s.candidate.id;
    e["score"] = s.score;
    suppressed.push_back(e);
  }
  json cfg = to_json(config);
  cfg.update(to_json(tables));
  return {{"seed", config.rng_seed},
          {"clusters", clusters},
          {"unassigned", unassigned},
          {"suppressed", suppressed},
          {"config", cfg}};
}

inline PosesDocument parse_poses(std::string_view text, const std::string& source = "poses") {
  const json j = detail::parse_text(text, source);
  const detail::Context ctx(text, source);
  detail::only_keys(ctx, j, "", {"seed", "clusters", "unassigned", "suppressed", "config"});
  PosesDocument doc;
  if (j.contains("config")) {
    apply_config(j["config"], doc.config, doc.tables, {}, source + " (config)");
  }

  auto read_candidate = [&](const json& v, const std::string& ptr, const char* id_key) {
    Candidate c;
    c.id = detail::unsigned_integer(ctx, detail::member(ctx, v, ptr, id_key), ptr + "/" + id_key);
    c.part = detail::part_class(ctx, detail::member(ctx, v, ptr, "class"), ptr + "/class");
    c.pos = detail::point(ctx, v, ptr);
    c.unary = detail::number(ctx, detail::member(ctx, v, ptr, "unary"), ptr + "/unary");
    return c;
  };

  const json& clusters = detail::member(ctx, j, "", "clusters");
  if (!clusters.is_array()) ctx.fail("/clusters", "clusters must be an array");
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const std::string ptr = "/clusters/" + std::to_string(i);
    const json& c = clusters[i];
    detail::only_keys(ctx, c, ptr, {"id", "spawned", "anchor", "parts"});
    PersonCluster pc;
    pc.id = static_cast<ClusterId>(
        detail::unsigned_integer(ctx, detail::member(ctx, c, ptr, "id"), ptr + "/id"));
    pc.spawned = detail::boolean(ctx, detail::member(ctx, c, ptr, "spawned"), ptr + "/spawned");
    const json& parts = detail::member(ctx, c, ptr, "parts");
    if (!parts.is_object()) ctx.fail(ptr + "/parts", "parts must be an object keyed by class");
    for (const auto& [cls, p] : parts.items()) {
      const std::string pp = ptr + "/parts/" + cls;
      detail::only_keys(ctx, p, pp, {"candidate_id", "x", "y", "unary", "affinity", "anchor"});
      auto part = parse_part(cls);
      if (!part) ctx.fail(pp, "unknown part class \"" + cls + "\"");
      AssignedPart ap;
      ap.candidate.id = detail::unsigned_integer(ctx, detail::member(ctx, p, pp, "candidate_id"),
                                                 pp + "/candidate_id");
      ap.candidate.part = *part;
      ap.candidate.pos = detail::point(ctx, p, pp);
      ap.candidate.unary = p.contains("unary") ? detail::number(ctx, p["unary"], pp + "/unary") : 1.0;
      ap.affinity = p.contains("affinity") ? detail::number(ctx, p["affinity"], pp + "/affinity") : 1.0;
      ap.anchor = p.contains("anchor") ? detail::boolean(ctx, p["anchor"], pp + "/anchor") : false;
      pc.add(ap);
    }
    if (c.contains("anchor")) {
      pc.anchor = detail::point(ctx, c["anchor"], ptr + "/anchor");
    } else if (const AssignedPart* loc = locator_part(pc)) {
      pc.anchor = loc->candidate.pos;
    }
    doc.result.clusters.push_back(std::move(pc));
  }
  if (j.contains("unassigned")) {
    const json& u = j["unassigned"];
    if (!u.is_array()) ctx.fail("/unassigned", "unassigned must be an array");
    for (std::size_t i = 0; i < u.size(); ++i) {
      doc.result.unassigned.push_back(read_candidate(u[i], "/unassigned/" + std::to_string(i), "id"));
    }
  }
  if (j.contains("suppressed")) {
    const json& s = j["suppressed"];
    if (!s.is_array()) ctx.fail("/suppressed", "suppressed must be an array");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string ptr = "/suppressed/" + std::to_string(i);
      SuppressedPart sp;
      sp.candidate = read_candidate(s[i], ptr, "candidate_id");
      sp.score = detail::number(ctx, detail::member(ctx, s[i], ptr, "score"), ptr + "/score");
      doc.result.suppressed.push_back(sp);
    }
  }
  return doc;
}

inline json to_json(const Trace& t) {
  json stages = json::array();
  for (const StageTrace& s : t.stages) {
    json aff = json::array();
    for (const auto& a : s.affinities) {
      aff.push_back({{"part", a.part}, {"cluster", a.cluster}, {"affinity", a.affinity}});
    }
    json commits = json::array();
    for (const auto& c : s.commits) {
      json e = {{"part", c.part},
                {"cluster", c.cluster},
                {"affinity", c.affinity},
                {"anchor_distance", c.anchor_distance},
                {"gate_fallback", c.gate_fallback}};
      e["gate_radius"] = c.gate_radius ? json(*c.gate_radius) : json(nullptr);
      commits.push_back(e);
    }
    stages.push_back({{"class", std::string(name(s.part))},
                      {"candidates", s.candidate_count},
                      {"representatives", s.representatives},
                      {"proximal_cluster_counts", s.gated_counts},
                      {"affinities", aff},
                      {"commits", commits},
                      {"spawned", s.spawned},
                      {"suppressed", s.suppressed},
                      {"clusters_after", s.clusters_after}});
  }
  json out = {{"head_seeds", t.head_seeds}, {"stages", stages}};
  out["head_length"] = t.head_length ? json(*t.head_length) : json(nullptr);
  return out;
}

// ---------------------------------------------------------------------------
// Ground truth, noise, reports

inline json to_json(const SceneGroundTruth& gt, std::optional<std::uint64_t> seed = {}) {
  json persons = json::array();
  for (const GtPerson& p : gt.persons) {
    json joints = json::object();
    for (PartClass c : chain_order()) {
      joints[std::string(name(c))] = {{"x", p.joints[slot(c)].x},
                                      {"y", p.joints[slot(c)].y},
                                      {"occluded", p.occluded[slot(c)]}};
    }
    persons.push_back({{"id", p.id},
                       {"height", p.height},
                       {"head_top", detail::point_json(p.head_top)},
                       {"joints", joints}});
  }
  json out = {{"image", {{"width", gt.width}, {"height", gt.height}}}, {"persons", persons}};
  if (seed) out["seed"] = *seed;
  return out;
}

inline SceneGroundTruth parse_ground_truth(std::string_view text,
                                           const std::string& source = "ground truth") {
  const json j = detail::parse_text(text, source);
  const detail::Context ctx(text, source);
  detail::only_keys(ctx, j, "", {"image", "persons", "seed"});
  SceneGroundTruth gt;
  const json& image = detail::member(ctx, j, "", "image");
  gt.width = detail::number(ctx, detail::member(ctx, image, "/image", "width"), "/image/width");
  gt.height = detail::number(ctx, detail::member(ctx, image, "/image", "height"), "/image/height");
  const json& persons = detail::member(ctx, j, "", "persons");
  if (!persons.is_array()) ctx.fail("/persons", "persons must be an array");
  for (std::size_t i = 0; i < persons.size(); ++i) {
    const std::string ptr = "/persons/" + std::to_string(i);
    const json& p = persons[i];
    GtPerson gp;
    gp.id = static_cast<std::uint32_t>(
        detail::unsigned_integer(ctx, detail::member(ctx, p, ptr, "id"), ptr + "/id"));
    gp.height = detail::number(ctx, detail::member(ctx, p, ptr, "height"), ptr + "/height");
    if (!(gp.height > 0.0)) ctx.fail(ptr + "/height", "height must be positive");
    gp.head_top = detail::point(ctx, detail::member(ctx, p, ptr, "head_top"), ptr + "/head_top");
    const json& joints = detail::member(ctx, p, ptr, "joints");
    for (PartClass c : chain_order()) {
      const std::string jp = ptr + "/joints/" + std::string(name(c));
      const json& jj = detail::member(ctx, joints, ptr + "/joints", std::string(name(c)).c_str());
      gp.joints[slot(c)] = detail::point(ctx, jj, jp);
      gp.occluded[slot(c)] =
          jj.contains("occluded") ? detail::boolean(ctx, jj["occluded"], jp + "/occluded") : false;
    }
    gt.persons.push_back(gp);
  }
  return gt;
}

/// Reads noise and scene-layout overrides from one flat object.
inline void apply_noise(const json& j, NoiseConfig& noise, SceneConfig& scene,
                        std::string_view text = {}, const std::string& source = "noise") {
  const detail::Context ctx(text, source);
  if (!j.is_object()) ctx.fail("", "noise configuration must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    const std::string ptr = "/" + key;
    auto num = [&]() { return detail::number(ctx, v, ptr); };
    auto range = [&]() {
      if (!v.is_array() || v.size() != 2) ctx.fail(ptr, key + " must be [lo, hi]");
      return Range{detail::number(ctx, v[0], ptr + "/0"), detail::number(ctx, v[1], ptr + "/1")};
    };
    auto integer = [&]() {
      if (!v.is_number_integer()) ctx.fail(ptr, key + " must be an integer");
      return v.get<int>();
    };
    if (key == "position_sigma") noise.position_sigma = num();
    else if (key == "spurious_per_class") noise.spurious_per_class = integer();
    else if (key == "unary_true_range") noise.unary_true_range = range();
    else if (key == "unary_spurious_range") noise.unary_spurious_range = range();
    else if (key == "occlusion_prob") noise.occlusion_prob = num();
    else if (key == "pairwise_sigma") noise.pairwise_sigma = num();
    else if (key == "duplicates_per_joint") noise.duplicates_per_joint = integer();
    else if (key == "duplicate_sigma") noise.duplicate_sigma = num();
    else if (key == "duplicate_unary_range") noise.duplicate_unary_range = range();
    else if (key == "occluded_emit_prob") noise.occluded_emit_prob = num();
    else if (key == "occluded_unary_range") noise.occluded_unary_range = range();
    else if (key == "occludable") {
      if (!v.is_array()) ctx.fail(ptr, "occludable must be an array of class names");
      noise.occludable.fill(false);
      for (std::size_t i = 0; i < v.size(); ++i) {
        noise.occludable[slot(detail::part_class(ctx, v[i], ptr + "/" + std::to_string(i)))] = true;
      }
    } else if (key == "height_min") scene.height_min = num();
    else if (key == "height_max") scene.height_max = num();
    else if (key == "articulation") scene.articulation = num();
    else if (key == "slot_spacing") scene.slot_spacing = num();
    else if (key == "image_width") scene.image_width = num();
    else if (key == "image_height") scene.image_height = num();
    else ctx.fail(ptr, "unknown noise field \"" + key + "\"");
  }
  try {
    noise.validate();
    scene.validate();
  } catch (const std::invalid_argument& e) {
    ctx.fail("", e.what());
  }
}

inline json to_json(const PckhReport& r) {
  json per_class = json::object();
  for (PartClass c : chain_order()) {
    const auto& v = r.per_class[slot(c)];
    per_class[std::string(name(c))] = v ? json(*v) : json(nullptr);
  }
  return {{"tau", r.tau},
          {"per_class", per_class},
          {"mean", r.mean},
          {"matched_persons", r.matched_persons},
          {"missed_persons", r.missed_persons},
          {"false_persons", r.false_persons},
          {"visible_joints", r.visible_joints},
          {"predicted_parts", r.predicted_parts},
          {"correct_parts", r.correct_parts},
          {"precision", r.precision()},
          {"recall", r.recall()}};
}

}  // namespace gpose::io

#endif  // GREEDYPOSE_IO_HPP
