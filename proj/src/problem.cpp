#include "qlsys/problem.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <cctype>
#include <sstream>

namespace qlsys {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::solve: return "solve";
    case Mode::oracle: return "oracle";
    case Mode::sphere: return "sphere";
    case Mode::halfspace: return "halfspace";
    case Mode::gradcheck: return "gradcheck";
  }
  return "?";
}

std::optional<Mode> mode_from_string(std::string_view s) {
  for (Mode m : {Mode::solve, Mode::oracle, Mode::sphere, Mode::halfspace, Mode::gradcheck})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

std::string Diagnostic::str() const {
  std::string out;
  if (line > 0) {
    out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    out += ": ";
  }
  return out + message;
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string s;
  for (const auto& d : diags) {
    if (!s.empty()) s += '\n';
    s += d.str();
  }
  return s;
}

}  // namespace

SpecError::SpecError(std::vector<Diagnostic> diags)
    : std::runtime_error(join_diagnostics(diags)), diags_(std::move(diags)) {}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t ProblemSpec::space_dim() const {
  return mode == Mode::halfspace ? halfspace_dim : extents.size();
}

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
  std::size_t key_column = 0;
  std::size_t value_column = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s = {
      {"domain", {"kind", "lower", "upper", "resolution", "mask"}},
      {"weight", {"kind", "alpha", "beta", "c", "shift"}},
      {"boundary", {"u1", "u2", "u3", "u4"}},
      {"box", {"bound"}},
      {"tensor", {"kind", "d1_1", "d1_2", "d2_1", "d2_2"}},
      {"solver", {"tol_pg", "max_iters", "step", "tau", "init"}},
      {"oracle", {"source", "damping", "max_iters", "compare"}},
      {"sphere", {"candidates", "pole", "normalize"}},
      {"halfspace", {"dim", "radii", "spacing", "window_lower", "window_upper"}},
      {"gradcheck", {"step", "tolerance"}},
      {"output", {"field", "field_second", "summary", "history", "timings"}},
  };
  return s;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Keys with an index pattern (u<k>, d<i>_<a>) beyond the listed examples.
bool patterned_key(const std::string& section, const std::string& key) {
  if (section == "boundary") return key.size() > 1 && key[0] == 'u' && all_digits(key.substr(1)) && key != "u0";
  if (section == "tensor" && key.size() > 3 && key[0] == 'd') {
    const auto us = key.find('_');
    return us != std::string::npos && all_digits(key.substr(1, us - 1)) &&
           all_digits(key.substr(us + 1));
  }
  return false;
}

std::string nearest(const std::string& word, const std::vector<std::string>& options) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& o : options) {
    const std::size_t d = edit_distance(word, o);
    if (d < best_d) {
      best_d = d;
      best = o;
    }
  }
  return best;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

class Reader {
 public:
  Reader(std::string_view text, Mode mode) : mode_(mode) { tokenize(text); }

  std::vector<Diagnostic> diags;

  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }

  Entry* find(const std::string& section, const std::string& key) {
    auto it = sections_.find(section);
    if (it == sections_.end()) return nullptr;
    auto jt = it->second.find(key);
    if (jt == it->second.end()) return nullptr;
    jt->second.used = true;
    return &jt->second;
  }

  Entry* require(const std::string& section, const std::string& key) {
    Entry* e = find(section, key);
    if (!e)
      diags.push_back({0, 0, "missing required key '" + key + "' in [" + section + "] for mode " +
                                 std::string(to_string(mode_))});
    return e;
  }

  void error(const Entry& e, const std::string& msg, std::size_t offset = 0) {
    diags.push_back({e.line, e.value_column + offset, msg});
  }

  std::optional<double> number(const Entry& e, std::string_view text, std::size_t offset) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
      error(e, "expected a number, got '" + std::string(text) + "'", offset);
      return std::nullopt;
    }
    return v;
  }

  std::optional<double> number(const std::string& section, const std::string& key) {
    Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return number(*e, e->value, 0);
  }

  std::optional<std::vector<double>> numbers(const Entry& e) {
    std::vector<double> out;
    bool ok = true;
    for_each_item(e.value, [&](std::string_view item, std::size_t off) {
      auto v = number(e, item, off);
      if (v)
        out.push_back(*v);
      else
        ok = false;
    });
    if (!ok) return std::nullopt;
    if (out.empty()) {
      error(e, "expected a list of numbers");
      return std::nullopt;
    }
    return out;
  }

  std::optional<SourcedExpression> expression(const std::string& section, const std::string& key) {
    Entry* e = find(section, key);
    if (!e) return std::nullopt;
    try {
      return SourcedExpression{Expression::parse(e->value), "[" + section + "] " + key, e->line};
    } catch (const ExpressionError& err) {
      error(*e, std::string("expression error: ") + err.what(), err.column() - 1);
      return std::nullopt;
    }
  }

  void report_unused() {
    for (auto& [name, sec] : sections_)
      for (auto& [key, e] : sec)
        if (!e.used)
          diags.push_back({e.line, e.key_column,
                           "key '" + key + "' in [" + name + "] is not used by mode " +
                               std::string(to_string(mode_))});
  }

 private:
  static void for_each_item(std::string_view s,
                            const std::function<void(std::string_view, std::size_t)>& fn) {
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ',')) ++i;
      const std::size_t start = i;
      while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != ',') ++i;
      if (i > start) fn(s.substr(start, i - start), start);
    }
  }

  void tokenize(std::string_view text) {
    const auto& sch = schema();
    std::vector<std::string> section_names;
    for (const auto& [k, v] : sch) section_names.push_back(k);

    std::string current;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view raw = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      const std::string line = trim(raw);
      if (line.empty()) continue;
      const std::size_t indent = raw.find_first_not_of(" \t") + 1;

      if (line.front() == '[') {
        if (line.back() != ']') {
          diags.push_back({line_no, indent, "section header is missing ']'"});
          current.clear();
          continue;
        }
        current = trim(std::string_view(line).substr(1, line.size() - 2));
        if (!sch.count(current)) {
          diags.push_back({line_no, indent + 1,
                           "unknown section [" + current + "]; did you mean [" +
                               nearest(current, section_names) + "]?"});
          current = "\x01";  // swallow keys of the unknown section
        } else if (sections_.count(current)) {
          diags.push_back({line_no, indent, "section [" + current + "] appears twice"});
        }
        sections_[current];
        continue;
      }

      const auto eq = raw.find('=');
      if (eq == std::string_view::npos) {
        diags.push_back({line_no, indent, "expected 'key = value'"});
        continue;
      }
      const std::string key = trim(raw.substr(0, eq));
      std::string_view rest = raw.substr(eq + 1);
      const std::size_t lead = rest.find_first_not_of(" \t");
      const std::size_t value_col = eq + 2 + (lead == std::string_view::npos ? 0 : lead);
      const std::string value = trim(rest);

      if (current.empty()) {
        diags.push_back({line_no, indent, "key '" + key + "' appears before any [section]"});
        continue;
      }
      if (current == "\x01") continue;
      const auto& keys = sch.at(current);
      if (std::find(keys.begin(), keys.end(), key) == keys.end() && !patterned_key(current, key)) {
        const std::string k = nearest(key, keys), sec = nearest(key, section_names);
        const std::string hint = edit_distance(key, sec) < edit_distance(key, k)
                                     ? "section [" + sec + "]"
                                     : "'" + k + "'";
        diags.push_back({line_no, indent,
                         "unknown key '" + key + "' in [" + current + "]; did you mean " + hint + "?"});
        continue;
      }
      if (value.empty()) {
        diags.push_back({line_no, value_col, "key '" + key + "' has an empty value"});
        continue;
      }
      auto& sec = sections_[current];
      if (sec.count(key)) {
        diags.push_back({line_no, indent, "key '" + key + "' is set twice in [" + current + "]"});
        continue;
      }
      sec[key] = Entry{value, line_no, indent, value_col, false};
    }
    sections_.erase("\x01");
  }

  Mode mode_;
  std::map<std::string, Section> sections_;
};

void parse_domain(Reader& r, ProblemSpec& spec) {
  Entry* kind = r.require("domain", "kind");
  if (kind) {
    if (kind->value == "box")
      spec.domain_kind = DomainKind::box;
    else if (kind->value == "masked_box")
      spec.domain_kind = DomainKind::masked_box;
    else
      r.error(*kind, "domain kind must be box or masked_box, got '" + kind->value + "'");
  }
  Entry* lo = r.require("domain", "lower");
  Entry* hi = r.require("domain", "upper");
  std::optional<std::vector<double>> lower, upper;
  if (lo) lower = r.numbers(*lo);
  if (hi) upper = r.numbers(*hi);
  if (lower && upper) {
    if (lower->size() != upper->size()) {
      r.error(*hi, "upper has " + std::to_string(upper->size()) + " entries but lower has " +
                       std::to_string(lower->size()));
    } else {
      for (std::size_t k = 0; k < lower->size(); ++k) {
        if (!((*lower)[k] < (*upper)[k]))
          r.error(*hi, "upper must exceed lower on axis " + std::to_string(k + 1));
        spec.extents.push_back({(*lower)[k], (*upper)[k]});
      }
    }
  }
  if (Entry* res = r.require("domain", "resolution")) {
    if (auto v = r.numbers(*res)) {
      for (double x : *v) {
        if (x != std::floor(x) || x < 3.0) {
          r.error(*res, "resolution entries must be integers >= 3");
          break;
        }
        spec.resolution.push_back(static_cast<std::size_t>(x));
      }
      if (spec.resolution.size() == 1 && spec.extents.size() > 1)
        spec.resolution.assign(spec.extents.size(), spec.resolution.front());
      if (!spec.extents.empty() && spec.resolution.size() != spec.extents.size())
        r.error(*res, "resolution needs one entry or one per axis");
    }
  }
  spec.mask = r.expression("domain", "mask");
  if (spec.domain_kind == DomainKind::masked_box && !spec.mask && kind)
    r.error(*kind, "masked_box needs a mask expression");
  if (spec.domain_kind == DomainKind::box && spec.mask && kind)
    r.error(*kind, "mask given but domain kind is box");
}

void parse_weight(Reader& r, ProblemSpec& spec) {
  Entry* kind = r.require("weight", "kind");
  if (!kind) return;
  auto positive = [&](const char* key, double dflt) {
    double v = dflt;
    if (auto x = r.number("weight", key)) {
      v = *x;
      if (!(v > 0.0)) r.error(*r.find("weight", key), std::string(key) + " must be > 0");
    }
    return v;
  };
  if (kind->value == "gaussian")
    spec.weight = WeightSpec::gaussian(positive("alpha", 1.0));
  else if (kind->value == "sphere_chart")
    spec.weight = WeightSpec::sphere_chart(positive("beta", 2.0));
  else if (kind->value == "constant")
    spec.weight = WeightSpec::constant(r.number("weight", "c").value_or(0.0));
  else
    r.error(*kind, "weight kind must be gaussian, sphere_chart or constant, got '" + kind->value + "'");
  spec.weight_shift = r.number("weight", "shift").value_or(0.0);
}

void parse_boundary(Reader& r, ProblemSpec& spec, std::size_t dim) {
  for (std::size_t a = 1;; ++a) {
    const std::string key = "u" + std::to_string(a);
    Entry* e = r.find("boundary", key);
    if (!e) break;
    auto ex = r.expression("boundary", key);
    if (!ex) continue;
    if (dim > 0 && ex->expr.max_variable() > dim)
      r.error(*e, "x" + std::to_string(ex->expr.max_variable()) + " used in a " +
                      std::to_string(dim) + "-dimensional domain");
    spec.boundary.push_back(std::move(*ex));
  }
  if (!r.find("boundary", "u1")) r.diags.push_back({0, 0, "missing required key 'u1' in [boundary]"});
}

void parse_solver(Reader& r, ProblemSpec& spec) {
  SolveOptions& o = spec.solver;
  if (auto v = r.number("solver", "tol_pg")) {
    if (!(*v > 0.0)) r.error(*r.find("solver", "tol_pg"), "tol_pg must be > 0");
    o.tol_pg = *v;
  }
  if (auto v = r.number("solver", "max_iters")) {
    if (*v < 1.0 || *v != std::floor(*v))
      r.error(*r.find("solver", "max_iters"), "max_iters must be a positive integer");
    else
      o.max_iters = static_cast<std::size_t>(*v);
  }
  if (Entry* e = r.find("solver", "step")) {
    if (e->value == "bb_armijo")
      o.step = StepRule::bb_armijo;
    else if (e->value == "fixed")
      o.step = StepRule::fixed;
    else
      r.error(*e, "step must be bb_armijo or fixed");
  }
  if (auto v = r.number("solver", "tau")) {
    if (!(*v > 0.0)) r.error(*r.find("solver", "tau"), "tau must be > 0");
    o.fixed_step = *v;
  }
  if (Entry* e = r.find("solver", "init")) {
    if (e->value == "harmonic_extension")
      o.init = InitKind::harmonic_extension;
    else if (e->value == "boundary_constant")
      o.init = InitKind::boundary_constant;
    else
      r.error(*e, "init must be harmonic_extension or boundary_constant");
  }
}

void parse_bool(Reader& r, const std::string& section, const std::string& key, bool& out) {
  if (Entry* e = r.find(section, key)) {
    if (e->value == "true")
      out = true;
    else if (e->value == "false")
      out = false;
    else
      r.error(*e, key + " must be true or false");
  }
}

void parse_count(Reader& r, const std::string& section, const std::string& key,
                 std::size_t minimum, std::size_t& out) {
  if (auto v = r.number(section, key)) {
    if (*v != std::floor(*v) || *v < static_cast<double>(minimum))
      r.error(*r.find(section, key), key + " must be an integer >= " + std::to_string(minimum));
    else
      out = static_cast<std::size_t>(*v);
  }
}

}  // namespace

ProblemSpec parse_problem(std::string_view text, Mode mode) {
  Reader r(text, mode);
  ProblemSpec spec;
  spec.mode = mode;

  if (mode == Mode::halfspace) {
    parse_count(r, "halfspace", "dim", 1, spec.halfspace_dim);
    if (Entry* e = r.require("halfspace", "radii")) {
      if (auto v = r.numbers(*e)) spec.radii = *v;
      for (std::size_t k = 0; k < spec.radii.size(); ++k)
        if (!(spec.radii[k] > 0.0) || (k > 0 && !(spec.radii[k] > spec.radii[k - 1]))) {
          r.error(*e, "radii must be positive and strictly increasing");
          break;
        }
    }
    if (auto v = r.number("halfspace", "spacing")) {
      spec.spacing = *v;
      if (!(*v > 0.0)) r.error(*r.find("halfspace", "spacing"), "spacing must be > 0");
    } else {
      r.require("halfspace", "spacing");
    }
    Entry* lo = r.require("halfspace", "window_lower");
    Entry* hi = r.require("halfspace", "window_upper");
    if (lo && hi) {
      auto a = r.numbers(*lo), b = r.numbers(*hi);
      if (a && b) {
        if (a->size() != spec.halfspace_dim || b->size() != spec.halfspace_dim)
          r.error(*hi, "window needs " + std::to_string(spec.halfspace_dim) + " entries per corner");
        else
          for (std::size_t k = 0; k < a->size(); ++k) spec.window.push_back({(*a)[k], (*b)[k]});
      }
    }
  } else {
    parse_domain(r, spec);
  }

  if (mode != Mode::sphere) parse_weight(r, spec);
  parse_boundary(r, spec, spec.space_dim());

  if (r.has_section("box")) {
    if (Entry* e = r.require("box", "bound")) {
      if (auto v = r.numbers(*e)) {
        if (v->size() == 1 && spec.components() > 1) v->assign(spec.components(), v->front());
        if (v->size() != spec.components())
          r.error(*e, "bound needs one entry or one per component");
        for (double c : *v)
          if (!(c > 0.0)) r.error(*e, "bound entries must be > 0");
        spec.bound = *v;
      }
    }
  }

  if (mode == Mode::solve || mode == Mode::gradcheck) {
    if (Entry* e = r.find("tensor", "kind")) {
      if (e->value == "diagonal")
        spec.tensor_diagonal = true;
      else if (e->value != "identity")
        r.error(*e, "tensor kind must be identity or diagonal");
    }
    const std::size_t n = spec.space_dim(), N = spec.components();
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t a = 1; a <= N; ++a) {
        const std::string key = "d" + std::to_string(i) + "_" + std::to_string(a);
        if (auto ex = r.expression("tensor", key)) {
          spec.tensor.emplace(key, std::move(*ex));
          spec.tensor_diagonal = true;
        }
      }
  }

  if (mode != Mode::gradcheck) parse_solver(r, spec);

  if (mode == Mode::oracle) {
    spec.source = r.expression("oracle", "source");
    if (auto v = r.number("oracle", "damping")) {
      if (!(*v > 0.0 && *v <= 1.0)) r.error(*r.find("oracle", "damping"), "damping must be in (0, 1]");
      spec.damping = *v;
    }
    parse_count(r, "oracle", "max_iters", 1, spec.picard_iters);
    parse_bool(r, "oracle", "compare", spec.compare);
    if (spec.components() != 1)
      r.diags.push_back({0, 0, "oracle mode is scalar: exactly one boundary component (u1)"});
  }

  if (mode == Mode::sphere) {
    parse_count(r, "sphere", "candidates", 16, spec.candidates);
    if (Entry* e = r.find("sphere", "pole")) {
      if (auto v = r.numbers(*e)) {
        if (v->size() != spec.components()) r.error(*e, "pole needs one entry per boundary component");
        spec.pole = *v;
      }
    }
    parse_bool(r, "sphere", "normalize", spec.normalize);
    if (spec.components() < 2)
      r.diags.push_back({0, 0, "sphere mode needs at least two boundary components (u1, u2, ...)"});
  }

  if (mode == Mode::gradcheck) {
    if (auto v = r.number("gradcheck", "step")) {
      if (!(*v > 0.0)) r.error(*r.find("gradcheck", "step"), "step must be > 0");
      spec.fd_step = *v;
    }
    if (auto v = r.number("gradcheck", "tolerance")) {
      if (!(*v > 0.0)) r.error(*r.find("gradcheck", "tolerance"), "tolerance must be > 0");
      spec.gradcheck_tolerance = *v;
    }
  }

  const std::pair<const char*, std::string*> outputs[] = {
      {"field", &spec.field_path},     {"field_second", &spec.field_second_path},
      {"summary", &spec.summary_path}, {"history", &spec.history_path},
      {"timings", &spec.timings_path}};
  for (const auto& [key, dst] : outputs)
    if (Entry* e = r.find("output", key)) *dst = e->value;

  r.report_unused();
  if (!r.diags.empty()) {
    std::stable_sort(r.diags.begin(), r.diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
      return a.line < b.line;
    });
    throw SpecError(std::move(r.diags));
  }
  return spec;
}

GridPtr build_spec_grid(const ProblemSpec& spec) {
  if (spec.mode == Mode::halfspace) throw std::logic_error("halfspace mode builds its own grids");
  DomainSpec domain = DomainSpec::box(spec.extents);
  if (spec.domain_kind == DomainKind::masked_box) {
    const Expression mask = spec.mask->expr;
    domain = DomainSpec::masked_box(spec.extents,
                                    [mask](std::span<const double> x) { return mask(x) >= 0.0; });
  }
  try {
    return build_grid(domain, spec.resolution);
  } catch (const std::invalid_argument& e) {
    throw SpecError({{0, 0, std::string("domain: ") + e.what()}});
  }
}

BoundaryData sample_spec_boundary(const ProblemSpec& spec, const GridPtr& grid) {
  const std::size_t N = spec.components();
  const auto& bn = grid->boundary_nodes();
  BoundaryData bd{grid, N, std::vector<double>(bn.size() * N)};
  std::vector<double> x(grid->dim());
  for (std::size_t s = 0; s < bn.size(); ++s) {
    grid->coords(bn[s], x);
    for (std::size_t a = 0; a < N; ++a) {
      const double v = spec.boundary[a].expr(x);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << spec.boundary[a].key << " evaluates to " << v << " at boundary node (";
        for (std::size_t k = 0; k < x.size(); ++k) msg << (k ? ", " : "") << x[k];
        msg << "); solve refused";
        throw SpecError({{spec.boundary[a].line, 0, msg.str()}});
      }
      bd.values[s * N + a] = v;
    }
  }
  return bd;
}

CoefficientTensor spec_tensor(const ProblemSpec& spec) {
  const std::size_t n = spec.space_dim(), N = spec.components();
  if (!spec.tensor_diagonal) return CoefficientTensor::identity(n, N);
  std::vector<std::optional<Expression>> diag(n * N);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < N; ++a) {
      auto it = spec.tensor.find("d" + std::to_string(i + 1) + "_" + std::to_string(a + 1));
      if (it != spec.tensor.end()) diag[i * N + a] = it->second.expr;
    }
  return CoefficientTensor::diagonal(n, N, [diag](std::span<const double> x, std::span<double> d) {
    for (std::size_t k = 0; k < diag.size(); ++k) d[k] = diag[k] ? (*diag[k])(x) : 1.0;
  });
}

}  // namespace qlsys
