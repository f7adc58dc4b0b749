#include "mugen/config.hpp"

#include <filesystem>
#include <fstream>
#include <cctype>
#include <cmath>
#include <sstream>

namespace mugen::config {

using nlohmann::json;
namespace fs = std::filesystem;

std::string Document::base_dir() const {
  const fs::path p(path);
  return p.has_parent_path() ? p.parent_path().string() : std::string(".");
}

std::string Document::resolve(const std::string& p) const {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir()) / p).lexically_normal().string();
}

namespace {

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Document parse(const std::string& text, const std::string& path) {
  Document doc;
  doc.path = path;
  doc.text = text;
  try {
    doc.data = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON (" + e.what() +
                      ")");
  }
  if (!doc.data.is_object()) throw ConfigError(path + ":1: top level must be an object");
  return doc;
}

Document load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot read config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::size_t line_of(const Document& doc, const std::string& key) {
  const std::string needle = "\"" + key + "\"";
  std::size_t pos = 0;
  while ((pos = doc.text.find(needle, pos)) != std::string::npos) {
    std::size_t after = pos + needle.size();
    while (after < doc.text.size() && std::isspace(static_cast<unsigned char>(doc.text[after]))) ++after;
    if (after < doc.text.size() && doc.text[after] == ':') return line_col(doc.text, pos).first;
    pos = after;
  }
  return 0;
}

Section::Section(const Document& doc, const json& obj, std::string where)
    : doc_(&doc), obj_(&obj), where_(std::move(where)) {
  if (!obj.is_object()) fail("", "must be an object");
}

void Section::fail(const std::string& key, const std::string& message) const {
  const std::string full = key.empty() ? where_ : (where_.empty() ? key : where_ + "." + key);
  std::size_t line = key.empty() ? 0 : line_of(*doc_, key);
  if (line == 0 && !where_.empty()) {
    const std::string leaf = where_.substr(where_.rfind('.') == std::string::npos ? 0 : where_.rfind('.') + 1);
    line = line_of(*doc_, leaf);
  }
  if (line == 0) line = 1;
  throw ConfigError(doc_->path + ":" + std::to_string(line) + ": key '" + full + "' " + message);
}

bool Section::has(const std::string& key) const { return obj_->contains(key); }

const json& Section::raw(const std::string& key) {
  used_.insert(key);
  if (!obj_->contains(key)) fail(key, "is required but missing");
  return obj_->at(key);
}

Section Section::child(const std::string& key) {
  const json& j = raw(key);
  if (!j.is_object()) fail(key, "must be an object");
  return Section(*doc_, j, where_.empty() ? key : where_ + "." + key);
}

std::size_t Section::count(const std::string& key, std::size_t fallback, std::size_t min) {
  used_.insert(key);
  if (!obj_->contains(key)) return fallback;
  const json& j = obj_->at(key);
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0)) {
    fail(key, "must be a non-negative integer");
  }
  const std::size_t v = j.get<std::size_t>();
  if (v < min) fail(key, "must be >= " + std::to_string(min));
  return v;
}

double Section::positive(const std::string& key, double fallback) {
  const double v = get<double>(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) fail(key, "must be a positive number");
  return v;
}

double Section::non_negative(const std::string& key, double fallback) {
  const double v = get<double>(key, fallback);
  if (!(v >= 0.0) || !std::isfinite(v)) fail(key, "must be a non-negative number");
  return v;
}

void Section::finish() const {
  for (auto it = obj_->begin(); it != obj_->end(); ++it) {
    if (!used_.count(it.key())) fail(it.key(), "is not recognized");
  }
}

namespace {

std::vector<double> number_list(Section& s, const std::string& key) {
  if (!s.has(key)) {
    s.get<json>(key, json());
    return {};
  }
  const json& j = s.raw(key);
  if (!j.is_array()) s.fail(key, "must be a list of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) s.fail(key, "must be a list of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::size_t> count_list(Section& s, const std::string& key, const std::vector<std::size_t>& fallback,
                                    std::size_t min = 1) {
  if (!s.has(key)) {
    s.get<json>(key, json());
    return fallback;
  }
  const json& j = s.raw(key);
  if (!j.is_array()) s.fail(key, "must be a list of integers");
  std::vector<std::size_t> out;
  for (const auto& v : j) {
    if (!v.is_number_unsigned()) s.fail(key, "must be a list of non-negative integers");
    out.push_back(v.get<std::size_t>());
    if (out.back() < min) s.fail(key, "entries must be >= " + std::to_string(min));
  }
  return out;
}

ExecutionModel parse_noise(Section& s) {
  return ExecutionModel(s.positive("sigma_velocity", 0.02), s.positive("sigma_angle", 0.02));
}

planning::ExpansionConfig parse_expansion(Section& s) {
  planning::ExpansionConfig e;
  if (s.has("expansion_threshold") && s.raw("expansion_threshold").is_null()) {
    e = planning::ExpansionConfig::disabled();
  } else {
    e.threshold = s.positive("expansion_threshold", e.threshold);
  }
  e.cap = s.count("expansion_cap", e.cap, 0);
  return e;
}

std::uint64_t parse_seed(Section& s) {
  if (!s.has("seed")) {
    s.get<json>("seed", json());
    return 0;
  }
  const json& j = s.raw("seed");
  if (!j.is_number_unsigned()) s.fail("seed", "must be a non-negative integer");
  return j.get<std::uint64_t>();
}

double default_learning_rate(training::Method m) {
  return (m == training::Method::Softmax || m == training::Method::Reinforce) ? 1e-5 : 1e-4;
}

GeneratorEntry parse_generator(Section g, const Document& doc) {
  GeneratorEntry e;
  e.name = g.require<std::string>("name");
  if (e.name.empty() || e.name.find_first_of(",/\n") != std::string::npos) {
    g.fail("name", "must be non-empty and free of ',' '/' and newlines");
  }
  e.objective = g.get<std::string>("objective", "");
  if (g.has("checkpoint")) {
    e.checkpoint = doc.resolve(g.require<std::string>("checkpoint"));
  } else {
    const std::string kind = g.require<std::string>("kind");
    if (kind != "uniform_grid" && kind != "constant") g.fail("kind", "must be 'uniform_grid' or 'constant'");
    e.fixed = {{"kind", kind}};
    if (kind == "uniform_grid") e.fixed["m"] = g.count("m", 8);
    if (kind == "constant") e.fixed["actions"] = g.raw("actions");
    e.fixed["turn"] = g.get<int>("turn", 1);
    if (e.objective.empty()) e.objective = kind;
  }
  g.finish();
  return e;
}

std::vector<GeneratorEntry> parse_generators(Section& s, const Document& doc, bool required) {
  std::vector<GeneratorEntry> out;
  if (!s.has("generators")) {
    if (required) s.fail("generators", "is required but missing");
    s.get<json>("generators", json());
    return out;
  }
  const json& list = s.raw("generators");
  if (!list.is_array()) s.fail("generators", "must be a list");
  for (const auto& g : list) out.push_back(parse_generator(Section(doc, g, "generators[]"), doc));
  return out;
}

}  // namespace

json parse_env(Section s) {
  const std::string id = s.require<std::string>("id");
  try {
    if (id == "location_game") {
      training::LocationEnv e;
      e.n = s.count("n", e.n, 2);
      e.k = s.count("k", e.k);
      e.k_opp = s.count("k_opp", e.k_opp, 0);
      e.alpha = s.positive("alpha", e.alpha);
      e.beta = s.positive("beta", e.beta);
      s.finish();
      if (e.k > e.n * e.n) s.fail("k", "must be <= n*n");
      if (e.k_opp > e.n * e.n) s.fail("k_opp", "must be <= n*n");
      return e.to_json();
    }
    if (id == "curling") {
      json env = {{"id", "curling"}};
      if (s.has("sheet")) {
        Section sheet = s.child("sheet");
        const json defaults = sheet_to_json(curling::SheetConfig{});
        for (auto it = defaults.begin(); it != defaults.end(); ++it) sheet.get<json>(it.key(), json());
        sheet.finish();
        env["sheet"] = s.raw("sheet");
      }
      if (s.has("encoding")) {
        const json& e = s.raw("encoding");
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned() ||
            e[0].get<std::size_t>() == 0 || e[1].get<std::size_t>() == 0) {
          s.fail("encoding", "must be [rows, cols] with positive integers");
        }
        env["encoding"] = e;
      }
      s.finish();
      return make_continuous_domain(env)->config();
    }
    if (id == "synthetic_bump") {
      json env = {{"id", "synthetic_bump"}};
      for (const char* k : {"centers", "width", "random_heights", "height_min"}) {
        if (s.has(k)) env[k] = s.raw(k);
      }
      s.finish();
      return make_continuous_domain(env)->config();
    }
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind("env: ", 0) == 0 || msg.rfind("sheet: ", 0) == 0) s.fail("", msg.substr(msg.find(':') + 2));
    throw;
  }
  s.fail("id", "must be one of 'curling', 'synthetic_bump', 'location_game' (got '" + id + "')");
}

training::TrainConfig parse_train(Section s) {
  training::TrainConfig c;
  c.env = parse_env(s.child("env"));
  const std::string method = s.require<std::string>("method");
  try {
    c.method = training::parse_method(method);
  } catch (const std::invalid_argument&) {
    s.fail("method", "must be one of sum, max, softmax, mu, reinforce, distillation (got '" + method + "')");
  }
  const bool location = training::is_location_env(c.env);
  if (location && c.method == training::Method::Distillation) s.fail("method", "distillation needs a continuous env");
  if (!location && c.method == training::Method::Reinforce) s.fail("method", "reinforce needs env 'location_game'");
  c.m = s.count("m", c.m);
  c.outcomes = s.count("outcomes", c.outcomes);
  c.minibatch = s.count("minibatch", c.minibatch);
  c.iterations = s.count("iterations", c.iterations, 0);
  c.learning_rate = s.positive("learning_rate", default_learning_rate(c.method));
  c.l2 = s.non_negative("l2", c.l2);
  c.temperature = s.positive("temperature", c.temperature);
  c.noise = parse_noise(s);
  c.hidden = count_list(s, "hidden", c.hidden);
  c.seed = parse_seed(s);
  c.checkpoint_every = s.count("checkpoint_every", c.checkpoint_every, 0);
  c.turn = s.get<int>("turn", c.turn);
  if (c.turn != 1 && c.turn != -1) s.fail("turn", "must be -1 or 1");
  c.grid = s.count("grid", c.grid);
  c.planner_budget = s.count("planner_budget", c.planner_budget);
  c.exploration = s.non_negative("exploration", c.exploration);
  c.dataset_states = s.count("dataset_states", c.dataset_states);
  if (c.method == training::Method::Distillation && c.m > c.grid * c.grid) s.fail("m", "must be <= grid*grid");
  s.finish();
  return c;
}

namespace {

CorpusSource parse_corpus_source(Section& s, const Document& doc) {
  CorpusSource c;
  const json& j = s.raw("corpus");
  if (j.is_string()) {
    c.path = doc.resolve(j.get<std::string>());
    if (c.path.empty()) s.fail("corpus", "must not be empty");
    return c;
  }
  Section g = s.child("corpus");
  c.env = parse_env(g.child("env"));
  c.states = g.count("states", c.states);
  c.seed = parse_seed(g);
  g.finish();
  return c;
}

}  // namespace

EvalConfig parse_eval(Section s) {
  EvalConfig c;
  const Document& doc = s.document();
  c.generators = parse_generators(s, doc, false);
  c.corpus = parse_corpus_source(s, doc);
  if (s.has("planners")) {
    const json& list = s.raw("planners");
    if (!list.is_array() || list.empty()) s.fail("planners", "must be a non-empty list");
    c.planners.clear();
    for (const auto& p : list) {
      try {
        c.planners.push_back(eval::parse_planner(p.get<std::string>()));
      } catch (const std::exception&) {
        s.fail("planners", "entries must be 'ucb' or 'kr_ucb'");
      }
    }
  } else {
    s.get<json>("planners", json());
  }
  c.budgets = count_list(s, "budgets", c.budgets);
  if (c.budgets.empty()) s.fail("budgets", "must not be empty");
  c.exploration_ucb = s.non_negative("exploration_ucb", c.exploration_ucb);
  c.exploration_kr = s.non_negative("exploration_kr", c.exploration_kr);
  c.noise = parse_noise(s);
  c.expansion = parse_expansion(s);
  c.eval_samples = s.count("eval_samples", c.eval_samples);
  c.seed = parse_seed(s);
  s.finish();
  return c;
}

AnalyzeConfig parse_analyze(Section s) {
  AnalyzeConfig c;
  const Document& doc = s.document();
  c.generators = parse_generators(s, doc, false);
  c.corpus = parse_corpus_source(s, doc);
  c.bins = s.count("bins", c.bins, 2);
  c.seed = parse_seed(s);
  s.finish();
  return c;
}

SweepConfig parse_sweep(Section s) {
  SweepConfig c;
  const Document& doc = s.document();
  c.train = parse_train(s.child("train"));
  c.corpus = parse_corpus_source(s, doc);
  const std::string planner = s.get<std::string>("planner", "ucb");
  try {
    c.planner = eval::parse_planner(planner);
  } catch (const std::invalid_argument&) {
    s.fail("planner", "must be 'ucb' or 'kr_ucb'");
  }
  c.budget = s.count("budget", c.budget);
  c.eval_samples = s.count("eval_samples", c.eval_samples);
  c.seed = parse_seed(s);
  if (s.has("grid")) {
    Section g = s.child("grid");
    c.exploration = number_list(g, "exploration");
    c.temperature = number_list(g, "temperature");
    c.learning_rate = number_list(g, "learning_rate");
    c.sigma = number_list(g, "sigma");
    for (double v : c.temperature) {
      if (!(v > 0.0)) g.fail("temperature", "entries must be positive");
    }
    for (double v : c.learning_rate) {
      if (!(v > 0.0)) g.fail("learning_rate", "entries must be positive");
    }
    for (double v : c.sigma) {
      if (!(v > 0.0)) g.fail("sigma", "entries must be positive");
    }
    for (double v : c.exploration) {
      if (!(v >= 0.0)) g.fail("exploration", "entries must be non-negative");
    }
    g.finish();
  } else {
    s.get<json>("grid", json());
  }
  s.finish();
  return c;
}

CorpusConfig parse_corpus(Section s) {
  CorpusConfig c;
  c.env = parse_env(s.child("env"));
  c.count = s.count("count", c.count);
  c.seed = parse_seed(s);
  s.finish();
  return c;
}

PlanConfig parse_plan(Section s) {
  PlanConfig c;
  const Document& doc = s.document();
  c.corpus = parse_corpus_source(s, doc);
  c.state_index = s.count("state_index", c.state_index, 0);
  c.generator = parse_generator(s.child("generator"), doc);
  const std::string planner = s.get<std::string>("planner", "kr_ucb");
  try {
    c.planner = eval::parse_planner(planner);
  } catch (const std::invalid_argument&) {
    s.fail("planner", "must be 'ucb' or 'kr_ucb'");
  }
  c.budget = s.count("budget", c.budget);
  c.exploration = s.non_negative("exploration", c.planner == eval::PlannerKind::Ucb ? 1.0 : 0.5);
  c.noise = parse_noise(s);
  c.expansion = parse_expansion(s);
  c.seed = parse_seed(s);
  s.finish();
  return c;
}

std::string config_hash(const json& canonical) { return fnv1a_hex(canonical.dump()); }

}  // namespace mugen::config
