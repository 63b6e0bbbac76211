#include "bandit/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bandit {

namespace {

using nlohmann::json;

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    throw ParseError(source_, path.empty() ? "/" : path, message);
  }

  json parse(std::string_view text) const {
    try {
      return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
      throw ParseError(source_, "byte " + std::to_string(e.byte), "invalid JSON");
    }
  }

  const json& object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail(path, "expected an object");
    std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& item : j.items())
      if (!keys.count(item.key())) fail(path + "/" + item.key(), "unknown field");
    return j;
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
  }

  std::size_t index(const json& j, const std::string& path) const {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
    return j.get<std::size_t>();
  }

  Vector vector(const json& j, const std::string& path, std::optional<std::size_t> expected = std::nullopt) const {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    if (expected && j.size() != *expected)
      fail(path, "expected " + std::to_string(*expected) + " entries, found " + std::to_string(j.size()));
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
      v(static_cast<Eigen::Index>(i)) = number(j[i], path + "/" + std::to_string(i));
    return v;
  }

  Matrix square(const json& j, const std::string& path, std::optional<std::size_t> expected = std::nullopt) const {
    if (!j.is_array()) fail(path, "expected an array of rows");
    const std::size_t n = expected.value_or(j.size());
    if (j.size() != n) fail(path, "expected " + std::to_string(n) + " rows, found " + std::to_string(j.size()));
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) m.row(static_cast<Eigen::Index>(i)) = vector(j[i], path + "/" + std::to_string(i), n);
    return m;
  }

  const json& field(const json& j, const std::string& path, const char* key) const {
    if (!j.contains(key)) fail(path + "/" + key, "missing required field");
    return j.at(key);
  }

 private:
  std::string source_;
};

UtilitySpec parse_utility(const Reader& rd, const json& j, const std::string& path) {
  rd.object(j, path, {"type", "discount", "lambda"});
  const json& type = rd.field(j, path, "type");
  if (!type.is_string()) rd.fail(path + "/type", "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "linear") {
    if (j.contains("lambda")) rd.fail(path + "/lambda", "linear utility takes no lambda");
    LinearUtility u;
    if (j.contains("discount")) u.discount = rd.number(j["discount"], path + "/discount");
    return u;
  }
  if (j.contains("discount")) rd.fail(path + "/discount", "exponential utility takes no discount");
  const double lambda = rd.number(rd.field(j, path, "lambda"), path + "/lambda");
  if (t == "risk_averse") return RiskAverseUtility{lambda};
  if (t == "risk_seeking") return RiskSeekingUtility{lambda};
  rd.fail(path + "/type", "unknown utility type '" + t + "'");
}

BanditChain parse_bandit(const Reader& rd, const json& j, const std::string& path,
                         const std::optional<UtilitySpec>& utility) {
  rd.object(j, path, {"p", "x0", "x", "r", "q"});
  const bool raw = j.contains("p") || j.contains("x0") || j.contains("x");
  const bool built = j.contains("r") || j.contains("q");
  if (raw == built) rd.fail(path, "a bandit needs either p, x0, x or r, q");
  try {
    if (built) {
      Vector r = rd.vector(rd.field(j, path, "r"), path + "/r");
      Matrix q = rd.square(rd.field(j, path, "q"), path + "/q", static_cast<std::size_t>(r.size()));
      return BanditChain(std::move(r), std::move(q));
    }
    RawBandit b;
    b.p = rd.square(rd.field(j, path, "p"), path + "/p");
    const auto n = static_cast<std::size_t>(b.p.rows());
    b.x0 = rd.vector(rd.field(j, path, "x0"), path + "/x0", n);
    b.x = rd.square(rd.field(j, path, "x"), path + "/x", n);
    return build_chain(b, utility.value_or(LinearUtility{}));
  } catch (const ParseError&) {
    throw;
  } catch (const InvalidInput& e) {
    rd.fail(path, e.what());
  }
}

MultiState parse_start(const Reader& rd, const json& j, const std::string& path, const Instance& instance) {
  if (!j.is_array()) rd.fail(path, "expected an array of local state ids");
  if (j.size() != instance.num_bandits())
    rd.fail(path, "expected one state per bandit (" + std::to_string(instance.num_bandits()) + ")");
  MultiState s(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = path + "/" + std::to_string(k);
    s[k] = rd.index(j[k], p);
    if (s[k] >= instance.chain(k).size()) rd.fail(p, "state out of range for bandit " + std::to_string(k));
  }
  return s;
}

Vector parse_reward_vector(const Reader& rd, const json& j, const std::string& path, const Instance& instance) {
  if (!j.is_array()) rd.fail(path, "expected an array");
  if (!j.empty() && j[0].is_array()) {
    if (j.size() != instance.num_bandits()) rd.fail(path, "expected one reward array per bandit");
    Vector v(static_cast<Eigen::Index>(instance.num_states()));
    for (std::size_t k = 0; k < j.size(); ++k)
      v.segment(static_cast<Eigen::Index>(instance.offset(k)), static_cast<Eigen::Index>(instance.chain(k).size())) =
          rd.vector(j[k], path + "/" + std::to_string(k), instance.chain(k).size());
    return v;
  }
  return rd.vector(j, path, instance.num_states());
}

ConstraintSpec parse_constraint_object(const Reader& rd, const json& j, const std::string& path,
                                       const Instance& instance) {
  rd.object(j, path, {"rewards", "bounds", "start"});
  ConstraintSpec spec;
  const std::string bpath = path + "/bounds";
  const json& bounds = j.contains("bounds") ? j["bounds"] : json::array();
  if (!bounds.is_array()) rd.fail(bpath, "expected an array of numbers");
  for (std::size_t w = 0; w < bounds.size(); ++w) spec.bounds.push_back(rd.number(bounds[w], bpath + "/" + std::to_string(w)));

  const std::string rpath = path + "/rewards";
  const json& rewards = rd.field(j, path, "rewards");
  const std::size_t types = spec.bounds.size() + 1;
  if (rewards.is_object()) {
    for (const auto& item : rewards.items()) {
      const std::string& key = item.key();
      bool ok = !key.empty() && key.size() < 6 && key.find_first_not_of("0123456789") == std::string::npos;
      if (!ok || std::stoul(key) >= types) rd.fail(rpath + "/" + key, "expected keys \"0\" .. \"" + std::to_string(types - 1) + "\"");
    }
    for (std::size_t w = 0; w < types; ++w) {
      const std::string key = std::to_string(w);
      if (!rewards.contains(key)) rd.fail(rpath + "/" + key, "missing reward type");
      spec.rewards.push_back(parse_reward_vector(rd, rewards[key], rpath + "/" + key, instance));
    }
  } else if (rewards.is_array()) {
    if (rewards.size() != types)
      rd.fail(rpath, "expected " + std::to_string(types) + " reward vectors (one more than bounds)");
    for (std::size_t w = 0; w < types; ++w)
      spec.rewards.push_back(parse_reward_vector(rd, rewards[w], rpath + "/" + std::to_string(w), instance));
  } else {
    rd.fail(rpath, "expected an array or an object keyed by reward type");
  }
  if (j.contains("start")) spec.start = parse_start(rd, j["start"], path + "/start", instance);
  return spec;
}

}  // namespace

InstanceDocument parse_instance(std::string_view text, const std::string& source) {
  const Reader rd(source);
  const json doc = rd.parse(text);
  rd.object(doc, "", {"hypothesis", "utility", "bandits", "start", "constraints", "name", "description"});

  std::optional<UtilitySpec> utility;
  if (doc.contains("utility")) utility = parse_utility(rd, doc["utility"], "/utility");

  std::optional<Hypothesis> hypothesis;
  if (doc.contains("hypothesis")) {
    const json& h = doc["hypothesis"];
    if (!h.is_string() || !(hypothesis = parse_hypothesis(h.get<std::string>())))
      rd.fail("/hypothesis", "expected \"RN\", \"RA\" or \"RS\"");
  }

  const json& bandits = rd.field(doc, "", "bandits");
  if (!bandits.is_array() || bandits.empty()) rd.fail("/bandits", "expected a nonempty array");
  std::vector<BanditChain> chains;
  bool any_raw = false;
  for (std::size_t k = 0; k < bandits.size(); ++k) {
    chains.push_back(parse_bandit(rd, bandits[k], "/bandits/" + std::to_string(k), utility));
    any_raw = any_raw || bandits[k].contains("p");
  }
  if (!hypothesis) {
    if (!any_raw && !utility) rd.fail("/hypothesis", "pre-built bandits need a declared hypothesis");
    hypothesis = natural_hypothesis(utility.value_or(LinearUtility{}));
  }

  InstanceDocument out{Instance(std::move(chains), *hypothesis), std::nullopt, std::nullopt};
  if (doc.contains("start")) out.start = parse_start(rd, doc["start"], "/start", out.instance);
  if (doc.contains("constraints"))
    out.constraints = parse_constraint_object(rd, doc["constraints"], "/constraints", out.instance);
  return out;
}

ConstraintSpec parse_constraints(std::string_view text, const Instance& instance, const std::string& source) {
  const Reader rd(source);
  return parse_constraint_object(rd, rd.parse(text), "", instance);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw InvalidInput("cannot read " + path.string());
  return buf.str();
}

InstanceDocument read_instance(const std::filesystem::path& path) {
  return parse_instance(read_text_file(path), path.string());
}

ConstraintSpec read_constraints(const std::filesystem::path& path, const Instance& instance) {
  return parse_constraints(read_text_file(path), instance, path.string());
}

}  // namespace bandit
