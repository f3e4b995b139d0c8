#include "cqe/netlist.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cqe/error.hpp"
#include "cqe/special.hpp"
#include "cqe/topology.hpp"

namespace cqe {

namespace {

struct UnitEntry {
  const char* symbol;
  UnitFamily family;
  double scale;
};

constexpr std::array<UnitEntry, 18> kUnits{{
    {"Hz", UnitFamily::Frequency, 1.0},
    {"kHz", UnitFamily::Frequency, 1e3},
    {"MHz", UnitFamily::Frequency, 1e6},
    {"GHz", UnitFamily::Frequency, 1e9},
    {"THz", UnitFamily::Frequency, 1e12},
    {"F", UnitFamily::Capacitance, 1.0},
    {"mF", UnitFamily::Capacitance, 1e-3},
    {"uF", UnitFamily::Capacitance, 1e-6},
    {"nF", UnitFamily::Capacitance, 1e-9},
    {"pF", UnitFamily::Capacitance, 1e-12},
    {"fF", UnitFamily::Capacitance, 1e-15},
    {"aF", UnitFamily::Capacitance, 1e-18},
    {"H", UnitFamily::Inductance, 1.0},
    {"mH", UnitFamily::Inductance, 1e-3},
    {"uH", UnitFamily::Inductance, 1e-6},
    {"nH", UnitFamily::Inductance, 1e-9},
    {"pH", UnitFamily::Inductance, 1e-12},
    {"fH", UnitFamily::Inductance, 1e-15},
}};

bool unit_legal(const Unit& unit, ElementKind kind) {
  switch (kind) {
    case ElementKind::Capacitor:
      return unit.family != UnitFamily::Inductance;
    case ElementKind::Inductor:
      return unit.family != UnitFamily::Capacitance;
    case ElementKind::Junction:
      return unit.family == UnitFamily::Frequency;
  }
  return false;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

// ---------------------------------------------------------------- lexer

struct Token {
  std::string text;
  int column = 0;
};

bool is_punct(char c) { return c == '(' || c == ')' || c == ',' || c == ':' || c == ';' || c == '='; }

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (is_punct(c)) {
      out.push_back({std::string(1, c), static_cast<int>(i) + 1});
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && !is_punct(line[i]) && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
  }
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s[0]);
  if (!(std::isalpha(head) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '-';
  });
}

class Cursor {
 public:
  Cursor(std::vector<Token> tokens, int line, int eol_column)
      : tokens_(std::move(tokens)), line_(line), eol_column_(eol_column) {}

  bool done() const { return pos_ >= tokens_.size(); }
  const Token* peek() const { return done() ? nullptr : &tokens_[pos_]; }
  bool peek_is(std::string_view text) const { return !done() && tokens_[pos_].text == text; }
  int column() const { return done() ? eol_column_ : tokens_[pos_].column; }
  int line() const { return line_; }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, column()); }
  [[noreturn]] void fail_at(const Token& t, const std::string& message) const {
    throw ParseError(message, line_, t.column);
  }

  const Token& next(const char* what) {
    if (done()) fail(std::string("expected ") + what);
    return tokens_[pos_++];
  }

  void expect(std::string_view text) {
    if (!peek_is(text)) fail("expected '" + std::string(text) + "'");
    ++pos_;
  }

  bool accept(std::string_view text) {
    if (!peek_is(text)) return false;
    ++pos_;
    return true;
  }

  double number(const char* what) {
    const Token& t = next(what);
    double v = 0.0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    if (!t.text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
      fail_at(t, std::string("expected ") + what + ", got '" + t.text + "'");
    return v;
  }

  int integer(const char* what) {
    const Token& t = next(what);
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size())
      fail_at(t, std::string("expected ") + what + ", got '" + t.text + "'");
    return v;
  }

  std::string identifier(const char* what) {
    const Token& t = next(what);
    if (!is_identifier(t.text)) fail_at(t, std::string("expected ") + what + ", got '" + t.text + "'");
    return t.text;
  }

  void expect_end() {
    if (!done()) fail("unexpected '" + tokens_[pos_].text + "'");
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int line_;
  int eol_column_;
};

struct SourceLine {
  int number;
  std::string text;  // comment stripped
};

std::string strip_comment(std::string_view line) {
  auto hash = line.find('#');
  return std::string(line.substr(0, hash));
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  CircuitSpec run(std::string_view text);

 private:
  void parse_setting(Cursor& cur, std::set<std::string>& seen);
  void parse_loop(Cursor& cur);
  void parse_capacitor(Cursor& cur);
  void parse_edge(Cursor& cur);

  ElementValue parse_value(Cursor& cur, ElementKind kind);
  QualityFactor parse_quality(Cursor& cur);
  std::vector<std::string> parse_loop_list(Cursor& cur);
  CapacitorDef parse_cap_ref(Cursor& cur);
  Element parse_element(Cursor& cur);

  CircuitSpec spec_;
  std::map<std::string, CapacitorDef> caps_;
  std::map<NodePair, std::vector<Element>> edges_;
};

double positive(Cursor& cur, const char* what) {
  int col = cur.column();
  double v = cur.number(what);
  if (!(v > 0.0)) throw ParseError(std::string(what) + " must be positive", cur.line(), col);
  return v;
}

double non_negative(Cursor& cur, const char* what) {
  int col = cur.column();
  double v = cur.number(what);
  if (v < 0.0) throw ParseError(std::string(what) + " must be non-negative", cur.line(), col);
  return v;
}

int mode_suffix(const Token& key, std::string_view prefix, Cursor& cur) {
  std::string_view rest = std::string_view(key.text).substr(prefix.size());
  int mode = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), mode);
  if (ec != std::errc() || ptr != rest.data() + rest.size() || mode < 1)
    cur.fail_at(key, "invalid mode index in '" + key.text + "'");
  return mode;
}

void Parser::parse_setting(Cursor& cur, std::set<std::string>& seen) {
  const Token& key = cur.next("setting name");
  if (!seen.insert(key.text).second) cur.fail_at(key, "duplicate setting '" + key.text + "'");
  cur.expect("=");
  auto& env = spec_.environment;
  const std::string& k = key.text;
  if (k == "flux_dist") {
    const Token& v = cur.next("flux distribution");
    if (v.text == "junctions")
      spec_.flux_dist = FluxDistribution::Junctions;
    else if (v.text == "all")
      spec_.flux_dist = FluxDistribution::All;
    else
      cur.fail_at(v, "flux_dist must be 'junctions' or 'all'");
  } else if (k == "temp") {
    env.temperature = positive(cur, "temperature");
  } else if (k == "omega_low") {
    env.omega_low = positive(cur, "omega_low");
  } else if (k == "omega_high") {
    env.omega_high = positive(cur, "omega_high");
  } else if (k == "t_exp") {
    env.t_exp = positive(cur, "t_exp");
  } else if (k == "unit_cap" || k == "unit_ind" || k == "unit_jj") {
    const Token& v = cur.next("unit");
    auto unit = find_unit(v.text);
    if (!unit) cur.fail_at(v, "unknown unit '" + v.text + "'");
    ElementKind kind = k == "unit_cap" ? ElementKind::Capacitor
                       : k == "unit_ind" ? ElementKind::Inductor
                                         : ElementKind::Junction;
    if (!unit_legal(*unit, kind))
      cur.fail_at(v, "unit '" + v.text + "' is not allowed for " + std::string(to_string(kind)) + "s");
    (kind == ElementKind::Capacitor ? spec_.units.capacitor
     : kind == ElementKind::Inductor ? spec_.units.inductor
                                     : spec_.units.junction) = *unit;
  } else if (k == "nodes") {
    int col = cur.column();
    int n = cur.integer("node count");
    if (n < 1) throw ParseError("node count must be at least 1", cur.line(), col);
    spec_.num_nodes = n;
  } else if (k == "charge_noise") {
    env.default_charge_noise = non_negative(cur, "charge noise amplitude");
  } else if (k.starts_with("charge_noise.")) {
    env.charge_noise[mode_suffix(key, "charge_noise.", cur)] = non_negative(cur, "charge noise amplitude");
  } else if (k.starts_with("charge_offset.")) {
    spec_.charge_offsets[mode_suffix(key, "charge_offset.", cur)] = cur.number("charge offset");
  } else {
    cur.fail_at(key, "unknown setting '" + k + "'");
  }
  cur.expect_end();
}

void Parser::parse_loop(Cursor& cur) {
  const Token& id_tok = *cur.peek();
  LoopDef loop;
  loop.id = cur.identifier("loop id");
  if (spec_.find_loop(loop.id)) cur.fail_at(id_tok, "duplicate loop id '" + loop.id + "'");
  cur.expect("=");
  cur.expect("flux");
  loop.external_flux = cur.number("flux value");
  while (!cur.done()) {
    const Token& opt = cur.next("loop option");
    if (opt.text == "A")
      loop.noise_amp = non_negative(cur, "flux noise amplitude");
    else
      cur.fail_at(opt, "unknown loop option '" + opt.text + "'");
  }
  spec_.loops.push_back(std::move(loop));
}

ElementValue Parser::parse_value(Cursor& cur, ElementKind kind) {
  ElementValue value;
  value.magnitude = positive(cur, "element value");
  value.unit = kind == ElementKind::Capacitor ? spec_.units.capacitor
               : kind == ElementKind::Inductor ? spec_.units.inductor
                                               : spec_.units.junction;
  if (const Token* t = cur.peek(); t && t->text != ";") {
    if (auto unit = find_unit(t->text)) {
      // Henry-valued junctions are reported by validate().
      bool legal = unit_legal(*unit, kind) ||
                   (kind == ElementKind::Junction && unit->family == UnitFamily::Inductance);
      if (!legal)
        cur.fail_at(*t, "unit '" + t->text + "' is not allowed for " + std::string(to_string(kind)) + "s");
      value.unit = *unit;
      cur.next("unit");
    } else {
      static const std::set<std::string> options{"Q", "loops", "cap", "A", "delta", "x"};
      if (!options.count(t->text)) cur.fail_at(*t, "unknown unit '" + t->text + "'");
    }
  }
  return value;
}

QualityFactor Parser::parse_quality(Cursor& cur) {
  if (cur.accept("default")) return QualityFactor{};
  if (cur.accept("powerlaw")) {
    cur.expect("(");
    double q0 = positive(cur, "quality factor");
    cur.expect(",");
    double fref = positive(cur, "reference frequency");
    cur.expect(",");
    double exponent = cur.number("exponent");
    cur.expect(")");
    return QualityFactor::power_law(q0, fref, exponent);
  }
  return QualityFactor::constant(positive(cur, "quality factor"));
}

std::vector<std::string> Parser::parse_loop_list(Cursor& cur) {
  std::vector<std::string> ids;
  do {
    const Token& t = *cur.peek();
    std::string id = cur.identifier("loop id");
    if (!spec_.find_loop(id)) cur.fail_at(t, "reference to undeclared loop '" + id + "'");
    if (std::find(ids.begin(), ids.end(), id) != ids.end()) cur.fail_at(t, "loop '" + id + "' listed twice");
    ids.push_back(std::move(id));
  } while (cur.accept(","));
  return ids;
}

CapacitorDef Parser::parse_cap_ref(Cursor& cur) {
  const Token& t = *cur.peek();
  std::string name = cur.identifier("capacitor name");
  auto it = caps_.find(name);
  if (it == caps_.end()) cur.fail_at(t, "reference to undeclared capacitor '" + name + "'");
  return it->second;
}

Element Parser::parse_element(Cursor& cur) {
  const Token& kind_tok = cur.next("element kind (C, L or JJ)");
  auto option_end = [&] { return cur.done() || cur.peek_is(";"); };
  if (kind_tok.text == "C") {
    CapacitorDef cap;
    cap.value = parse_value(cur, ElementKind::Capacitor);
    while (!option_end()) {
      const Token& opt = cur.next("capacitor option");
      if (opt.text == "Q")
        cap.quality = parse_quality(cur);
      else
        cur.fail_at(opt, "unknown capacitor option '" + opt.text + "'");
    }
    return cap;
  }
  if (kind_tok.text == "L") {
    InductorDef ind;
    ind.value = parse_value(cur, ElementKind::Inductor);
    while (!option_end()) {
      const Token& opt = cur.next("inductor option");
      if (opt.text == "loops")
        ind.loops = parse_loop_list(cur);
      else if (opt.text == "Q")
        ind.quality = parse_quality(cur);
      else if (opt.text == "cap")
        ind.parallel_cap = parse_cap_ref(cur);
      else
        cur.fail_at(opt, "unknown inductor option '" + opt.text + "'");
    }
    return ind;
  }
  if (kind_tok.text == "JJ") {
    JunctionDef jj;
    jj.value = parse_value(cur, ElementKind::Junction);
    while (!option_end()) {
      const Token& opt = cur.next("junction option");
      if (opt.text == "loops")
        jj.loops = parse_loop_list(cur);
      else if (opt.text == "A")
        jj.noise_amp = non_negative(cur, "critical-current noise amplitude");
      else if (opt.text == "delta")
        jj.gap_ev = positive(cur, "superconducting gap");
      else if (opt.text == "x")
        jj.qp_density = non_negative(cur, "quasiparticle density");
      else if (opt.text == "cap")
        jj.parallel_cap = parse_cap_ref(cur);
      else
        cur.fail_at(opt, "unknown junction option '" + opt.text + "'");
    }
    return jj;
  }
  cur.fail_at(kind_tok, "unknown element kind '" + kind_tok.text + "'");
}

void Parser::parse_capacitor(Cursor& cur) {
  const Token& t = *cur.peek();
  CapacitorDef cap;
  cap.name = cur.identifier("capacitor name");
  if (caps_.count(cap.name)) cur.fail_at(t, "duplicate capacitor '" + cap.name + "'");
  cur.expect("=");
  cap.value = parse_value(cur, ElementKind::Capacitor);
  while (!cur.done()) {
    const Token& opt = cur.next("capacitor option");
    if (opt.text == "Q")
      cap.quality = parse_quality(cur);
    else
      cur.fail_at(opt, "unknown capacitor option '" + opt.text + "'");
  }
  caps_.emplace(cap.name, std::move(cap));
}

void Parser::parse_edge(Cursor& cur) {
  cur.expect("(");
  int col_i = cur.column();
  int i = cur.integer("node index");
  cur.expect(",");
  int col_j = cur.column();
  int j = cur.integer("node index");
  cur.expect(")");
  cur.expect(":");
  if (i < 0) throw ParseError("node index must be non-negative", cur.line(), col_i);
  if (j < 0) throw ParseError("node index must be non-negative", cur.line(), col_j);
  if (i == j) throw ParseError("edge connects node " + std::to_string(i) + " to itself", cur.line(), col_i);
  if (cur.done()) cur.fail("empty edge");
  std::vector<Element> elements;
  while (!cur.done()) {
    if (cur.peek_is(";")) {
      cur.next(";");
      continue;
    }
    elements.push_back(parse_element(cur));
    if (!cur.done()) cur.expect(";");
  }
  if (elements.empty()) cur.fail("empty edge");
  auto& list = edges_[NodePair::make(i, j)];
  for (auto& e : elements) list.push_back(std::move(e));
}

CircuitSpec Parser::run(std::string_view text) {
  enum class Section { None, Settings, Loops, Capacitors, Elements };
  std::map<Section, std::vector<SourceLine>> lines;
  std::set<Section> opened;
  Section current = Section::None;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++number;
    std::string body = strip_comment(raw);
    if (blank(body)) continue;
    auto first = body.find_first_not_of(" \t");
    if (body[first] == '[') {
      auto close = body.find(']', first);
      if (close == std::string::npos) throw ParseError("unterminated section header", number, static_cast<int>(first) + 1);
      if (!blank(std::string_view(body).substr(close + 1)))
        throw ParseError("unexpected text after section header", number, static_cast<int>(close) + 2);
      std::string name = body.substr(first + 1, close - first - 1);
      if (name == "settings")
        current = Section::Settings;
      else if (name == "loops")
        current = Section::Loops;
      else if (name == "capacitors")
        current = Section::Capacitors;
      else if (name == "elements")
        current = Section::Elements;
      else
        throw ParseError("unknown section '" + name + "'", number, static_cast<int>(first) + 2);
      if (!opened.insert(current).second)
        throw ParseError("section '" + name + "' appears twice", number, static_cast<int>(first) + 1);
      continue;
    }
    if (current == Section::None)
      throw ParseError("content outside of a section", number, static_cast<int>(first) + 1);
    lines[current].push_back({number, std::move(body)});
  }

  auto cursor_for = [](const SourceLine& l) {
    return Cursor(tokenize(l.text), l.number, static_cast<int>(l.text.size()) + 1);
  };

  std::set<std::string> seen;
  for (const auto& l : lines[Section::Settings]) {
    Cursor cur = cursor_for(l);
    parse_setting(cur, seen);
  }
  for (const auto& l : lines[Section::Loops]) {
    Cursor cur = cursor_for(l);
    parse_loop(cur);
  }
  for (const auto& l : lines[Section::Capacitors]) {
    Cursor cur = cursor_for(l);
    parse_capacitor(cur);
  }
  for (const auto& l : lines[Section::Elements]) {
    Cursor cur = cursor_for(l);
    parse_edge(cur);
  }
  if (edges_.empty()) throw ParseError("netlist has no elements", number, 1);

  int max_node = 0;
  for (auto& [pair, elements] : edges_) {
    max_node = std::max(max_node, pair.second);
    spec_.edges.push_back(Edge{pair, std::move(elements)});
  }
  if (spec_.num_nodes != 0 && spec_.num_nodes < max_node)
    throw InputError("setting 'nodes' = " + std::to_string(spec_.num_nodes) + " but node " +
                     std::to_string(max_node) + " is used");
  spec_.num_nodes = std::max(spec_.num_nodes, max_node);
  return std::move(spec_);
}

// ---------------------------------------------------------------- formatter

std::string format_value(const ElementValue& v) { return format_double(v.magnitude) + " " + v.unit.symbol; }

std::string format_quality(const QualityFactor& q) {
  switch (q.kind()) {
    case QualityFactor::Kind::Default:
      return "";
    case QualityFactor::Kind::Constant:
      return " Q " + format_double(q.q0());
    case QualityFactor::Kind::PowerLaw:
      return " Q powerlaw(" + format_double(q.q0()) + "," + format_double(q.f_ref()) + "," +
             format_double(q.exponent()) + ")";
    case QualityFactor::Kind::Custom:
      throw InputError("a custom quality-factor function cannot be written to a netlist");
  }
  return "";
}

std::string join_loops(const std::vector<std::string>& loops) {
  std::string out;
  for (std::size_t i = 0; i < loops.size(); ++i) out += (i ? "," : "") + loops[i];
  return out;
}

}  // namespace

// ---------------------------------------------------------------- units

std::optional<Unit> find_unit(std::string_view symbol) {
  for (const auto& u : kUnits)
    if (symbol == u.symbol) return Unit{u.family, u.scale, u.symbol};
  return std::nullopt;
}

Unit unit_or_throw(std::string_view symbol) {
  auto u = find_unit(symbol);
  if (!u) throw InputError("unknown unit '" + std::string(symbol) + "'");
  return *u;
}

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::Capacitor:
      return "capacitor";
    case ElementKind::Inductor:
      return "inductor";
    case ElementKind::Junction:
      return "junction";
  }
  return "?";
}

double to_si(const ElementValue& value, ElementKind kind) {
  using namespace constants;
  if (!unit_legal(value.unit, kind))
    throw InputError("unit '" + value.unit.symbol + "' is not allowed for " + std::string(to_string(kind)) + "s");
  if (!(value.magnitude > 0.0) || !std::isfinite(value.magnitude))
    throw InputError(std::string(to_string(kind)) + " value must be finite and positive");
  double x = value.magnitude * value.unit.scale;
  if (value.unit.family != UnitFamily::Frequency) return x;
  switch (kind) {
    case ElementKind::Capacitor:
      return e * e / (2.0 * h * x);
    case ElementKind::Inductor:
      return phi0_reduced * phi0_reduced / (h * x);
    case ElementKind::Junction:
      return h * x;
  }
  return x;
}

double from_si(double si_value, const Unit& unit, ElementKind kind) {
  using namespace constants;
  if (!unit_legal(unit, kind))
    throw InputError("unit '" + unit.symbol + "' is not allowed for " + std::string(to_string(kind)) + "s");
  if (unit.family != UnitFamily::Frequency) return si_value / unit.scale;
  double hz = 0.0;
  switch (kind) {
    case ElementKind::Capacitor:
      hz = e * e / (2.0 * h * si_value);
      break;
    case ElementKind::Inductor:
      hz = phi0_reduced * phi0_reduced / (h * si_value);
      break;
    case ElementKind::Junction:
      hz = si_value / h;
      break;
  }
  return hz / unit.scale;
}

// ---------------------------------------------------------------- quality

QualityFactor QualityFactor::constant(double q) {
  if (!(q > 0.0)) throw InputError("quality factor must be positive");
  QualityFactor out;
  out.kind_ = Kind::Constant;
  out.q0_ = q;
  return out;
}

QualityFactor QualityFactor::power_law(double q0, double f_ref_hz, double exponent) {
  if (!(q0 > 0.0) || !(f_ref_hz > 0.0)) throw InputError("power-law quality factor needs positive q0 and f_ref");
  QualityFactor out;
  out.kind_ = Kind::PowerLaw;
  out.q0_ = q0;
  out.f_ref_ = f_ref_hz;
  out.exponent_ = exponent;
  return out;
}

QualityFactor QualityFactor::custom(std::function<double(double)> fn) {
  if (!fn) throw InputError("custom quality factor needs a callable");
  QualityFactor out;
  out.kind_ = Kind::Custom;
  out.fn_ = std::make_shared<const std::function<double(double)>>(std::move(fn));
  return out;
}

double QualityFactor::evaluate(double omega, ElementKind kind, double temperature) const {
  using namespace constants;
  const double w = std::abs(omega);
  double q = 0.0;
  switch (kind_) {
    case Kind::Constant:
      q = q0_;
      break;
    case Kind::PowerLaw:
      q = q0_ * std::pow(2.0 * pi * f_ref_ / w, exponent_);
      break;
    case Kind::Custom:
      q = (*fn_)(w);
      break;
    case Kind::Default:
      if (kind == ElementKind::Inductor) {
        const double x_ref = h * 0.5e9 / (2.0 * k_B * temperature);
        const double x = hbar * w / (2.0 * k_B * temperature);
        q = 500e6 * k0_sinh(x_ref) / k0_sinh(x);
      } else {
        q = 1e6 * std::pow(2.0 * pi * 6e9 / w, 0.7);
      }
      break;
  }
  if (!(q > 0.0) || !std::isfinite(q))
    throw NumericalError("quality factor evaluated to a non-positive or non-finite value at omega = " +
                         format_double(omega));
  return q;
}

bool operator==(const QualityFactor& a, const QualityFactor& b) {
  return a.kind_ == b.kind_ && a.q0_ == b.q0_ && a.f_ref_ == b.f_ref_ && a.exponent_ == b.exponent_ &&
         a.fn_ == b.fn_;
}

// ---------------------------------------------------------------- spec helpers

ElementKind kind_of(const Element& element) {
  return std::visit(
      [](const auto& el) {
        using T = std::decay_t<decltype(el)>;
        if constexpr (std::is_same_v<T, CapacitorDef>)
          return ElementKind::Capacitor;
        else if constexpr (std::is_same_v<T, InductorDef>)
          return ElementKind::Inductor;
        else
          return ElementKind::Junction;
      },
      element);
}

NodePair NodePair::make(int i, int j) {
  if (i == j) throw InputError("node pair must join two distinct nodes");
  if (i < 0 || j < 0) throw InputError("node indices must be non-negative");
  return i < j ? NodePair{i, j} : NodePair{j, i};
}

double NoiseEnvironment::charge_noise_for(int mode) const {
  auto it = charge_noise.find(mode);
  return it == charge_noise.end() ? default_charge_noise : it->second;
}

const LoopDef* CircuitSpec::find_loop(std::string_view id) const {
  for (const auto& l : loops)
    if (l.id == id) return &l;
  return nullptr;
}

int CircuitSpec::loop_index(std::string_view id) const {
  for (std::size_t i = 0; i < loops.size(); ++i)
    if (loops[i].id == id) return static_cast<int>(i);
  return -1;
}

CircuitSpec parse_netlist(std::string_view text) { return Parser{}.run(text); }

CircuitSpec load_netlist(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open netlist '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_netlist(ss.str());
}

std::string format_netlist(const CircuitSpec& spec) {
  std::ostringstream out;
  const auto& env = spec.environment;
  out << "[settings]\n";
  out << "flux_dist = " << (spec.flux_dist == FluxDistribution::All ? "all" : "junctions") << "\n";
  out << "nodes = " << spec.num_nodes << "\n";
  out << "temp = " << format_double(env.temperature) << "\n";
  out << "omega_low = " << format_double(env.omega_low) << "\n";
  out << "omega_high = " << format_double(env.omega_high) << "\n";
  out << "t_exp = " << format_double(env.t_exp) << "\n";
  out << "unit_cap = " << spec.units.capacitor.symbol << "\n";
  out << "unit_ind = " << spec.units.inductor.symbol << "\n";
  out << "unit_jj = " << spec.units.junction.symbol << "\n";
  out << "charge_noise = " << format_double(env.default_charge_noise) << "\n";
  for (const auto& [mode, a] : env.charge_noise) out << "charge_noise." << mode << " = " << format_double(a) << "\n";
  for (const auto& [mode, ng] : spec.charge_offsets) out << "charge_offset." << mode << " = " << format_double(ng) << "\n";

  if (!spec.loops.empty()) {
    out << "\n[loops]\n";
    for (const auto& l : spec.loops)
      out << l.id << " = flux " << format_double(l.external_flux) << " A " << format_double(l.noise_amp) << "\n";
  }

  std::map<std::string, const CapacitorDef*> named;
  auto collect = [&](const std::optional<CapacitorDef>& cap) {
    if (!cap) return;
    if (cap->name.empty()) throw InputError("parallel capacitors must be named to be written to a netlist");
    auto [it, inserted] = named.emplace(cap->name, &*cap);
    if (!inserted && !(*it->second == *cap))
      throw InputError("two different capacitors share the name '" + cap->name + "'");
  };
  for (const auto& edge : spec.edges)
    for (const auto& el : edge.elements) {
      if (auto* ind = std::get_if<InductorDef>(&el)) collect(ind->parallel_cap);
      if (auto* jj = std::get_if<JunctionDef>(&el)) collect(jj->parallel_cap);
    }
  if (!named.empty()) {
    out << "\n[capacitors]\n";
    for (const auto& [name, cap] : named) out << name << " = " << format_value(cap->value) << format_quality(cap->quality) << "\n";
  }

  out << "\n[elements]\n";
  for (const auto& edge : spec.edges) {
    out << "(" << edge.nodes.first << "," << edge.nodes.second << "):";
    for (std::size_t k = 0; k < edge.elements.size(); ++k) {
      out << (k ? "; " : " ");
      std::visit(
          [&](const auto& el) {
            using T = std::decay_t<decltype(el)>;
            if constexpr (std::is_same_v<T, CapacitorDef>) {
              out << "C " << format_value(el.value) << format_quality(el.quality);
            } else if constexpr (std::is_same_v<T, InductorDef>) {
              out << "L " << format_value(el.value);
              if (!el.loops.empty()) out << " loops " << join_loops(el.loops);
              out << format_quality(el.quality);
              if (el.parallel_cap) out << " cap " << el.parallel_cap->name;
            } else {
              out << "JJ " << format_value(el.value);
              if (!el.loops.empty()) out << " loops " << join_loops(el.loops);
              out << " A " << format_double(el.noise_amp) << " delta " << format_double(el.gap_ev) << " x "
                  << format_double(el.qp_density);
              if (el.parallel_cap) out << " cap " << el.parallel_cap->name;
            }
          },
          edge.elements[k]);
    }
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------- validation

std::vector<Diagnostic> validate(const CircuitSpec& spec) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string m) { out.push_back({Diagnostic::Severity::Error, std::move(m)}); };
  auto warn = [&](std::string m) { out.push_back({Diagnostic::Severity::Warning, std::move(m)}); };

  if (spec.edges.empty()) error("circuit has no elements");
  std::vector<bool> used(static_cast<std::size_t>(spec.num_nodes) + 1, false);
  used[0] = true;
  std::set<NodePair> pairs;
  for (const auto& edge : spec.edges) {
    if (edge.nodes.first < 0 || edge.nodes.second > spec.num_nodes || edge.nodes.first >= edge.nodes.second) {
      error("edge (" + std::to_string(edge.nodes.first) + "," + std::to_string(edge.nodes.second) +
            ") has invalid node indices");
      continue;
    }
    if (!pairs.insert(edge.nodes).second)
      error("edge (" + std::to_string(edge.nodes.first) + "," + std::to_string(edge.nodes.second) + ") listed twice");
    if (edge.elements.empty())
      error("empty edge (" + std::to_string(edge.nodes.first) + "," + std::to_string(edge.nodes.second) + ")");
    used[edge.nodes.first] = used[edge.nodes.second] = true;
    for (const auto& el : edge.elements) {
      if (auto* jj = std::get_if<JunctionDef>(&el)) {
        if (jj->value.unit.family != UnitFamily::Frequency)
          error("junction on edge (" + std::to_string(edge.nodes.first) + "," + std::to_string(edge.nodes.second) +
                ") uses unit '" + jj->value.unit.symbol + "'; junction energies must be given in Hz units");
        if (!(jj->gap_ev > 0.0)) error("junction gap must be positive");
      }
      auto check_loops = [&](const std::vector<std::string>& loops) {
        for (const auto& id : loops)
          if (!spec.find_loop(id)) error("reference to undeclared loop '" + id + "'");
      };
      if (auto* ind = std::get_if<InductorDef>(&el)) check_loops(ind->loops);
      if (auto* jj = std::get_if<JunctionDef>(&el)) check_loops(jj->loops);
    }
  }
  for (int n = 1; n <= spec.num_nodes; ++n)
    if (!used[static_cast<std::size_t>(n)]) error("disconnected node " + std::to_string(n));

  std::set<std::string> ids;
  for (const auto& loop : spec.loops) {
    if (!ids.insert(loop.id).second) error("duplicate loop id '" + loop.id + "'");
    if (!std::isfinite(loop.external_flux)) error("loop '" + loop.id + "' has a non-finite flux");
  }
  const auto& env = spec.environment;
  if (!(env.temperature > 0.0)) error("temperature must be positive");
  if (!(env.omega_low < env.omega_high)) error("omega_low must be below omega_high");
  if (!(env.t_exp > 0.0)) error("t_exp must be positive");
  if (has_errors(out)) return out;

  for (const auto& loop : spec.loops)
    if (auto problem = loop_closure_problem(spec, loop.id)) error(*problem);

  if (has_errors(out)) return out;
  try {
    for (const auto& msg : undeclared_cycle_warnings(spec)) warn(msg);
  } catch (const InputError& ex) {
    error(ex.what());
    return out;
  }

  Eigen::MatrixXd c;
  try {
    c = build_cap_matrix(spec);
  } catch (const InputError& ex) {
    error(ex.what());
    return out;
  }
  if (c.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    const auto& ev = es.eigenvalues();
    double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      if (ev[k] > 1e-12 * scale) continue;
      Eigen::Index node = 0;
      es.eigenvectors().col(k).cwiseAbs().maxCoeff(&node);
      warn("capacitance matrix singular at node " + std::to_string(node + 1) +
           " (no capacitive path to ground)");
    }
  }
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::Error; });
}

void require_valid(const CircuitSpec& spec) {
  auto diags = validate(spec);
  std::string message;
  for (const auto& d : diags)
    if (d.severity == Diagnostic::Severity::Error) message += (message.empty() ? "" : "; ") + d.message;
  if (!message.empty()) throw InputError("invalid circuit: " + message);
}

}  // namespace cqe
