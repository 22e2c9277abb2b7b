#include "stablesde/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <type_traits>

#include "stablesde/errors.hpp"
#include "stablesde/io.hpp"

namespace stablesde {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

class TomlReader {
 public:
  TomlReader(const std::string& text, std::size_t line) : s_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  TomlValue value(bool allow_newlines) {
    if (allow_newlines) skip_ws();
    if (pos_ >= s_.size()) fail(line_, "missing value");
    TomlValue v;
    v.line = line_;
    const char c = s_[pos_];
    if (c == '"') {
      ++pos_;
      v.kind = TomlValue::Kind::string;
      while (true) {
        if (pos_ >= s_.size() || s_[pos_] == '\n') fail(line_, "unterminated string");
        char d = s_[pos_++];
        if (d == '"') break;
        if (d == '\\') {
          if (pos_ >= s_.size()) fail(line_, "unterminated string");
          const char e = s_[pos_++];
          switch (e) {
            case '"': d = '"'; break;
            case '\\': d = '\\'; break;
            case 'n': d = '\n'; break;
            case 't': d = '\t'; break;
            default: fail(line_, std::string("unsupported escape \\") + e);
          }
        }
        v.text.push_back(d);
      }
      return v;
    }
    if (c == '[') {
      ++pos_;
      v.kind = TomlValue::Kind::array;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.items.push_back(value(true));
        if (v.items.back().kind == TomlValue::Kind::array) fail(line_, "nested arrays are not supported");
        skip_ws();
        if (pos_ >= s_.size()) fail(v.line, "unterminated array");
        if (s_[pos_] == ',') {
          ++pos_;
          skip_ws();
          if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return v;
          }
          continue;
        }
        if (s_[pos_] == ']') {
          ++pos_;
          return v;
        }
        fail(line_, "expected ',' or ']' in array");
      }
    }
    std::size_t end = pos_;
    while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                               s_[end] == '+' || s_[end] == '-' || s_[end] == '_'))
      ++end;
    const std::string word = s_.substr(pos_, end - pos_);
    if (word.empty()) fail(line_, std::string("unexpected character '") + c + "'");
    pos_ = end;
    if (word == "true" || word == "false") {
      v.kind = TomlValue::Kind::boolean;
      v.boolean = word == "true";
      v.text = word;
      return v;
    }
    std::string clean;
    for (char ch : word)
      if (ch != '_') clean.push_back(ch);
    const char* first = clean.data() + (clean[0] == '+' ? 1 : 0);
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(first, clean.data() + clean.size(), x);
    if (ec != std::errc() || ptr != clean.data() + clean.size() || !std::isfinite(x))
      fail(line_, "invalid value '" + word + "'");
    v.kind = TomlValue::Kind::number;
    v.number = x;
    v.text = clean;
    return v;
  }

  std::size_t pos() const { return pos_; }
  std::size_t line() const { return line_; }
  void set(std::size_t pos) { pos_ = pos; }
  const std::string& text() const { return s_; }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::set<std::string> headers;
  std::string prefix;
  TomlReader r(text, 1);
  while (true) {
    r.skip_ws();
    if (r.pos() >= text.size()) break;
    const std::size_t line = r.line();
    const std::size_t eol = std::min(text.find('\n', r.pos()), text.size());
    if (text[r.pos()] == '[') {
      const std::size_t close = text.find(']', r.pos());
      if (close == std::string::npos || close > eol) fail(line, "unterminated table header");
      const std::string name = trim(text.substr(r.pos() + 1, close - r.pos() - 1));
      std::stringstream parts(name);
      std::string part;
      while (std::getline(parts, part, '.'))
        if (!valid_key(trim(part))) fail(line, "invalid table name '" + name + "'");
      if (!headers.insert(name).second) fail(line, "duplicate table [" + name + "]");
      prefix = name + ".";
      r.set(close + 1);
      const std::string rest = trim(text.substr(close + 1, eol - close - 1));
      if (!rest.empty() && rest[0] != '#') fail(line, "unexpected text after table header");
      continue;
    }
    const std::size_t eq = text.find('=', r.pos());
    if (eq == std::string::npos || eq > eol) fail(line, "expected key = value");
    const std::string key = trim(text.substr(r.pos(), eq - r.pos()));
    if (!valid_key(key)) fail(line, "invalid key '" + key + "'");
    r.set(eq + 1);
    while (r.pos() < text.size() && (text[r.pos()] == ' ' || text[r.pos()] == '\t')) r.set(r.pos() + 1);
    TomlValue v = r.value(false);
    const std::size_t after = std::min(text.find('\n', r.pos()), text.size());
    const std::string rest = trim(text.substr(r.pos(), after - r.pos()));
    if (!rest.empty() && rest[0] != '#') fail(r.line(), "unexpected text after value");
    r.set(after);
    const std::string full = prefix + key;
    if (table.count(full)) fail(line, "duplicate key '" + full + "'");
    table.emplace(full, std::move(v));
  }
  return table;
}

namespace {

// Pulls typed values out of a TomlTable, recording problems instead of
// throwing so one ConfigError can list them all.
class Fields {
 public:
  explicit Fields(TomlTable t) : t_(std::move(t)) {}

  bool has(const std::string& k) const { return t_.count(k) != 0; }
  const TomlValue& at(const std::string& k) const { return t_.at(k); }
  bool has_prefix(const std::string& p) const {
    for (const auto& [k, v] : t_)
      if (k.rfind(p, 0) == 0) return true;
    return false;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    auto it = t_.find(key);
    if (it == t_.end()) return;
    used_.insert(key);
    convert(key, it->second, out);
  }

  void error(const std::string& msg) { errors_.push_back(msg); }

  void finish() {
    for (const auto& [k, v] : t_)
      if (!used_.count(k)) errors_.push_back(k + ": unknown key");
    if (errors_.empty()) return;
    std::string msg = "invalid configuration: ";
    for (std::size_t i = 0; i < errors_.size(); ++i) msg += (i ? "; " : "") + errors_[i];
    throw ConfigError(msg);
  }

  std::vector<std::string> errors_;

 private:
  void convert(const std::string& k, const TomlValue& v, std::string& out) {
    if (v.kind != TomlValue::Kind::string) return error(k + ": expected a string");
    out = v.text;
  }
  void convert(const std::string& k, const TomlValue& v, std::optional<std::string>& out) {
    std::string s;
    convert(k, v, s);
    out = s;
  }
  void convert(const std::string& k, const TomlValue& v, double& out) {
    if (v.kind != TomlValue::Kind::number) return error(k + ": expected a number");
    out = v.number;
  }
  void convert(const std::string& k, const TomlValue& v, bool& out) {
    if (v.kind != TomlValue::Kind::boolean) return error(k + ": expected true or false");
    out = v.boolean;
  }
  void convert(const std::string& k, const TomlValue& v, std::uint64_t& out) {
    std::uint64_t x = 0;
    const auto* b = v.text.data();
    const auto* e = b + v.text.size();
    auto [p, ec] = std::from_chars(b, e, x);
    if (v.kind != TomlValue::Kind::number || ec != std::errc() || p != e)
      return error(k + ": expected a nonnegative integer");
    out = x;
  }
  static_assert(std::is_same_v<std::size_t, std::uint64_t>, "counts are read as 64-bit integers");
  void convert(const std::string& k, const TomlValue& v, int& out) {
    std::uint64_t x = 0;
    const std::size_t before = errors_.size();
    convert(k, v, x);
    if (errors_.size() == before) out = static_cast<int>(x);
  }
  template <class T>
  void convert(const std::string& k, const TomlValue& v, std::vector<T>& out) {
    if (v.kind != TomlValue::Kind::array) return error(k + ": expected an array");
    out.clear();
    for (const auto& item : v.items) {
      T x{};
      const std::size_t before = errors_.size();
      convert(k, item, x);
      if (errors_.size() != before) return;
      out.push_back(x);
    }
  }

  TomlTable t_;
  std::set<std::string> used_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  Fields f(parse_toml(text));
  ExperimentConfig c;
  f.get("seed", c.seed);
  f.get("output", c.output);
  if (f.has("beta")) {
    // Either a number or the string "estimate".
    if (f.at("beta").kind == TomlValue::Kind::number) {
      double b = 0.0;
      f.get("beta", b);
      c.beta = b;
    } else {
      std::string s;
      f.get("beta", s);
      if (s != "estimate") f.error("beta: expected a number in [1, 2) or \"estimate\"");
    }
  } else {
    f.error("beta: missing (a number in [1, 2) or \"estimate\")");
  }

  auto& m = c.model;
  f.get("model.drift", m.drift);
  f.get("model.scale", m.scale);
  f.get("model.alpha", m.alpha);
  f.get("model.gamma", m.gamma);
  f.get("model.lower", m.lower);
  f.get("model.upper", m.upper);

  auto& d = c.data;
  f.get("data.path", d.path);
  f.get("data.column", d.column);
  f.get("data.T", d.T);
  if (f.has_prefix("data.simulate.")) {
    SimulateBlock s;
    f.get("data.simulate.N", s.N);
    f.get("data.simulate.T", s.T);
    f.get("data.simulate.theta", s.theta);
    f.get("data.simulate.x0", s.x0);
    f.get("data.simulate.refine", s.refine);
    d.simulate = s;
  }

  f.get("prior.kind", c.prior.kind);
  f.get("prior.mean", c.prior.mean);
  f.get("prior.sd", c.prior.sd);

  auto& mc = c.mcmc;
  f.get("mcmc.iterations", mc.iterations);
  f.get("mcmc.variant", mc.variant);
  f.get("mcmc.rho", mc.rho);
  f.get("mcmc.sigma_diag", mc.sigma_diag);
  f.get("mcmc.scale_by_rate", mc.scale_by_rate);
  f.get("mcmc.init", mc.init);
  f.get("mcmc.pilot", mc.pilot);
  f.get("mcmc.record_variances", mc.record_variances);
  f.get("mcmc.variance_stride", mc.variance_stride);
  f.get("mcmc.burn", mc.burn);
  f.get("mcmc.thin", mc.thin);

  auto& sw = c.sweep;
  f.get("sweep.N", sw.N);
  f.get("sweep.replicates", sw.replicates);
  f.get("sweep.iterations", sw.iterations);
  f.get("sweep.scale_by_rate", sw.scale_by_rate);

  // Semantic checks.
  if (c.beta && !(*c.beta >= 1.0 && *c.beta < 2.0)) f.error("beta: must lie in [1, 2)");
  if (c.output.empty()) f.error("output: must be nonempty");
  if (m.drift.empty()) f.error("model.drift: missing");
  if (m.scale.empty()) f.error("model.scale: missing");
  if (m.gamma.empty()) f.error("model.gamma: at least one scale parameter is required");
  const std::size_t p = m.alpha.size() + m.gamma.size();
  if (m.lower.size() != p) f.error("model.lower: expected " + std::to_string(p) + " entries");
  if (m.upper.size() != p) f.error("model.upper: expected " + std::to_string(p) + " entries");
  for (std::size_t i = 0; i < std::min(m.lower.size(), m.upper.size()); ++i)
    if (!(m.lower[i] < m.upper[i])) f.error("model.lower/upper: entry " + std::to_string(i) + " needs lower < upper");
  if (d.path.has_value() == d.simulate.has_value())
    f.error("data: exactly one of data.path and [data.simulate] must be given");
  if (d.path && !(d.T > 0.0)) f.error("data.T: must be positive");
  if (d.simulate) {
    if (d.simulate->N < 1) f.error("data.simulate.N: must be at least 1");
    if (!(d.simulate->T > 0.0)) f.error("data.simulate.T: must be positive");
    if (d.simulate->theta.size() != p) f.error("data.simulate.theta: expected " + std::to_string(p) + " entries");
    if (d.simulate->refine < 1) f.error("data.simulate.refine: must be at least 1");
  }
  const auto& pk = c.prior.kind;
  if (!pk.empty()) {
    if (pk.size() != p) f.error("prior.kind: expected " + std::to_string(p) + " entries");
    for (const auto& k : pk)
      if (k != "normal" && k != "uniform") f.error("prior.kind: '" + k + "' is not normal or uniform");
  }
  if (!c.prior.mean.empty() && c.prior.mean.size() != p) f.error("prior.mean: expected " + std::to_string(p) + " entries");
  if (!c.prior.sd.empty() && c.prior.sd.size() != p) f.error("prior.sd: expected " + std::to_string(p) + " entries");
  for (double s : c.prior.sd)
    if (!(s > 0.0)) f.error("prior.sd: entries must be positive");
  if (mc.iterations < 2) f.error("mcmc.iterations: must be at least 2");
  if (mc.variant != "mwg" && mc.variant != "cpm") f.error("mcmc.variant: must be \"mwg\" or \"cpm\"");
  if (!(mc.rho >= 0.0 && mc.rho <= 1.0)) f.error("mcmc.rho: must lie in [0, 1]");
  if (!mc.sigma_diag.empty() && mc.sigma_diag.size() != p)
    f.error("mcmc.sigma_diag: expected " + std::to_string(p) + " entries");
  for (double s : mc.sigma_diag)
    if (!(s > 0.0)) f.error("mcmc.sigma_diag: entries must be positive");
  if (mc.init != "mle" && mc.init != "truth") f.error("mcmc.init: must be \"mle\" or \"truth\"");
  if (mc.init == "truth" && !d.simulate) f.error("mcmc.init: \"truth\" needs simulated data");
  if (mc.variance_stride < 1) f.error("mcmc.variance_stride: must be at least 1");
  if (mc.thin < 1) f.error("mcmc.thin: must be at least 1");
  if (mc.burn >= mc.iterations) f.error("mcmc.burn: must be below mcmc.iterations");
  if (mc.pilot == 1) f.error("mcmc.pilot: must be 0 or at least 2");
  if (sw.N.empty()) f.error("sweep.N: must be nonempty");
  for (std::size_t n : sw.N)
    if (n < 1) f.error("sweep.N: entries must be at least 1");
  if (sw.replicates < 1) f.error("sweep.replicates: must be at least 1");
  if (sw.iterations < 2) f.error("sweep.iterations: must be at least 2");
  f.finish();

  // Expression and name checks last: they need a consistent shape.
  try {
    (void)c.make_model();
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid configuration: model: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_text(path)); }

ModelSpec ExperimentConfig::make_model() const {
  std::vector<Interval> box;
  for (std::size_t i = 0; i < model.lower.size(); ++i) box.push_back({model.lower[i], model.upper[i]});
  return ModelSpec(model.drift, model.scale, model.alpha, model.gamma, box);
}

Prior ExperimentConfig::make_prior() const {
  const std::size_t p = model.alpha.size() + model.gamma.size();
  std::vector<PriorTerm> terms(p);
  for (std::size_t i = 0; i < p; ++i) {
    const bool uniform = !prior.kind.empty() && prior.kind[i] == "uniform";
    terms[i].kind = uniform ? PriorTerm::Kind::uniform : PriorTerm::Kind::normal;
    terms[i].mean = prior.mean.empty() ? 0.0 : prior.mean[i];
    terms[i].sd = prior.sd.empty() ? 1.0 : prior.sd[i];
  }
  return Prior(terms);
}

MCMCConfig ExperimentConfig::make_mcmc(std::size_t p) const {
  MCMCConfig m;
  m.iterations = mcmc.iterations;
  m.seed = seed;
  m.variant = mcmc.variant == "cpm" ? Variant::cpm : Variant::mwg;
  m.rho = mcmc.rho;
  if (!mcmc.sigma_diag.empty()) {
    m.sigma = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t i = 0; i < p; ++i) m.sigma(i, i) = mcmc.sigma_diag[i];
  }
  m.scale_by_rate = mcmc.scale_by_rate;
  m.record_variances = mcmc.record_variances;
  m.variance_stride = mcmc.variance_stride;
  return m;
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

template <class T, class F>
std::string array(const std::vector<T>& xs, F fmt) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + fmt(xs[i]);
  return out + "]";
}

std::string num(double x) { return format_double(x); }
std::string boolean(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "seed = " << c.seed << "\n";
  o << "beta = " << (c.beta ? num(*c.beta) : quote("estimate")) << "\n";
  o << "output = " << quote(c.output) << "\n";

  o << "\n[model]\n";
  o << "drift = " << quote(c.model.drift) << "\n";
  o << "scale = " << quote(c.model.scale) << "\n";
  o << "alpha = " << array(c.model.alpha, quote) << "\n";
  o << "gamma = " << array(c.model.gamma, quote) << "\n";
  o << "lower = " << array(c.model.lower, num) << "\n";
  o << "upper = " << array(c.model.upper, num) << "\n";

  o << "\n[data]\n";
  if (c.data.path) {
    o << "path = " << quote(*c.data.path) << "\n";
    o << "column = " << quote(c.data.column) << "\n";
    o << "T = " << num(c.data.T) << "\n";
  }
  if (c.data.simulate) {
    const auto& s = *c.data.simulate;
    o << "\n[data.simulate]\n";
    o << "N = " << s.N << "\n";
    o << "T = " << num(s.T) << "\n";
    o << "theta = " << array(s.theta, num) << "\n";
    o << "x0 = " << num(s.x0) << "\n";
    o << "refine = " << s.refine << "\n";
  }

  if (!c.prior.kind.empty() || !c.prior.mean.empty() || !c.prior.sd.empty()) {
    o << "\n[prior]\n";
    if (!c.prior.kind.empty()) o << "kind = " << array(c.prior.kind, quote) << "\n";
    if (!c.prior.mean.empty()) o << "mean = " << array(c.prior.mean, num) << "\n";
    if (!c.prior.sd.empty()) o << "sd = " << array(c.prior.sd, num) << "\n";
  }

  const auto& m = c.mcmc;
  o << "\n[mcmc]\n";
  o << "iterations = " << m.iterations << "\n";
  o << "variant = " << quote(m.variant) << "\n";
  o << "rho = " << num(m.rho) << "\n";
  if (!m.sigma_diag.empty()) o << "sigma_diag = " << array(m.sigma_diag, num) << "\n";
  o << "scale_by_rate = " << boolean(m.scale_by_rate) << "\n";
  o << "init = " << quote(m.init) << "\n";
  o << "pilot = " << m.pilot << "\n";
  o << "record_variances = " << boolean(m.record_variances) << "\n";
  o << "variance_stride = " << m.variance_stride << "\n";
  o << "burn = " << m.burn << "\n";
  o << "thin = " << m.thin << "\n";

  const auto& s = c.sweep;
  o << "\n[sweep]\n";
  o << "N = " << array(s.N, [](std::size_t n) { return std::to_string(n); }) << "\n";
  o << "replicates = " << s.replicates << "\n";
  o << "iterations = " << s.iterations << "\n";
  o << "scale_by_rate = " << boolean(s.scale_by_rate) << "\n";
  return o.str();
}

}  // namespace stablesde
