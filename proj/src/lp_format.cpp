#include "grove/lp_format.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "grove/error.hpp"

namespace grove {

namespace {

constexpr std::size_t kLineWidth = 200;

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::to_string(v);
}

/// Accumulates tokens and wraps lines before they grow past kLineWidth.
class LineWriter {
 public:
  explicit LineWriter(std::ostream& out) : out_(out) {}
  void put(const std::string& token) {
    if (width_ + token.size() + 1 > kLineWidth && width_ > 0) {
      out_ << '\n';
      width_ = 0;
    }
    out_ << ' ' << token;
    width_ += token.size() + 1;
  }
  void end_line() {
    out_ << '\n';
    width_ = 0;
  }

 private:
  std::ostream& out_;
  std::size_t width_ = 0;
};

void put_term(LineWriter& w, double coef, const std::string& name, bool first) {
  if (coef < 0) {
    w.put("-");
  } else if (!first) {
    w.put("+");
  }
  const double a = std::abs(coef);
  if (a != 1.0) w.put(number(a));
  w.put(name);
}

}  // namespace

void write_lp(const MilpModel& model, std::ostream& out, const std::string& title) {
  out << "\\ " << title << ": " << model.variable_count() << " columns, " << model.row_count() << " rows\n";
  out << "Minimize\n";
  {
    LineWriter w(out);
    w.put("obj:");
    bool first = true;
    for (int j = 0; j < model.variable_count(); ++j) {
      const double c = model.objective()(j);
      if (c == 0.0) continue;
      put_term(w, c, model.variable(j).name, first);
      first = false;
    }
    const double k = model.objective_offset();
    if (k != 0.0 || first) {
      if (k < 0) {
        w.put("-");
      } else if (!first) {
        w.put("+");
      }
      w.put(number(std::abs(k)));
    }
    w.end_line();
  }
  out << "Subject To\n";
  for (int i = 0; i < model.row_count(); ++i) {
    const Row& row = model.row(i);
    LineWriter w(out);
    w.put(row.name + ":");
    auto [cols, vals] = model.row_terms(i);
    if (model.row_length(i) == 0) {
      w.put("0");
      w.put(model.variable_count() > 0 ? model.variable(0).name : "x");
    }
    for (int k = 0; k < model.row_length(i); ++k) put_term(w, vals[k], model.variable(cols[k]).name, k == 0);
    w.put(row.sense == Sense::LE ? "<=" : row.sense == Sense::GE ? ">=" : "=");
    w.put(number(row.rhs));
    w.end_line();
  }
  out << "Bounds\n";
  for (const Variable& v : model.variables()) {
    const bool binary_default = v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0;
    if (binary_default || (v.lower == 0.0 && std::isinf(v.upper) && v.upper > 0)) continue;
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << ' ' << v.name << " free\n";
    } else if (v.lower == v.upper) {
      out << ' ' << v.name << " = " << number(v.lower) << '\n';
    } else {
      out << ' ' << number(v.lower) << " <= " << v.name << " <= " << number(v.upper) << '\n';
    }
  }
  auto list = [&](const char* header, VarKind kind) {
    bool any = false;
    LineWriter w(out);
    for (const Variable& v : model.variables()) {
      if (v.kind != kind) continue;
      if (!any) out << header << '\n';
      any = true;
      w.put(v.name);
    }
    if (any) w.end_line();
  };
  list("General", VarKind::Integer);
  list("Binary", VarKind::Binary);
  out << "End\n";
  if (!out) throw IoError("failed writing LP text");
}

void export_model(const MilpModel& model, const std::filesystem::path& path, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_lp(model, out, title);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

struct Token {
  std::string text;
  int line;
};

enum class Section { None, Objective, Constraints, Bounds, General, Binary, End };

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_number(const std::string& s, double& v) {
  const std::string l = lower(s);
  if (l == "inf" || l == "+inf" || l == "infinity" || l == "+infinity") {
    v = std::numeric_limits<double>::infinity();
    return true;
  }
  if (l == "-inf" || l == "-infinity") {
    v = -std::numeric_limits<double>::infinity();
    return true;
  }
  if (s.empty() || !(std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.' || s[0] == '-' || s[0] == '+'))
    return false;
  auto [end, ec] = std::from_chars(s.data() + (s[0] == '+' ? 1 : 0), s.data() + s.size(), v);
  return ec == std::errc() && end == s.data() + s.size();
}

std::vector<Token> tokenize_line(const std::string& line, int line_no) {
  std::vector<Token> out;
  std::size_t k = 0;
  while (k < line.size()) {
    const char c = line[k];
    if (c == '\\') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++k;
      continue;
    }
    if (c == '<' || c == '>' || c == '=') {
      std::string op(1, c);
      if (k + 1 < line.size() && (line[k + 1] == '=' || line[k + 1] == '<' || line[k + 1] == '>')) op += line[++k];
      ++k;
      if (op == "=<" || op == "<") op = "<=";
      if (op == "=>" || op == ">") op = ">=";
      out.push_back({op, line_no});
      continue;
    }
    if (c == '+' || c == '-' || c == ':') {
      out.push_back({std::string(1, c), line_no});
      ++k;
      continue;
    }
    std::size_t start = k;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      while (k < line.size() && (std::isdigit(static_cast<unsigned char>(line[k])) || line[k] == '.' ||
                                 line[k] == 'e' || line[k] == 'E' ||
                                 ((line[k] == '+' || line[k] == '-') && (line[k - 1] == 'e' || line[k - 1] == 'E'))))
        ++k;
    } else {
      while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k])) &&
             std::string("+-:<>=\\").find(line[k]) == std::string::npos)
        ++k;
    }
    out.push_back({line.substr(start, k - start), line_no});
  }
  return out;
}

std::string tag_of(const std::string& name) {
  for (std::size_t k = 0; k + 2 < name.size(); ++k)
    if (name[k] == '_' && name[k + 1] == 't' && std::isdigit(static_cast<unsigned char>(name[k + 2])))
      return name.substr(0, k);
  return name;
}

class LpReader {
 public:
  MilpModel read(std::istream& in) {
    std::string line;
    int line_no = 0;
    std::vector<Token> pending;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string key = lower(trim(line));
      Section next = Section::None;
      if (key == "minimize" || key == "minimum" || key == "min") next = Section::Objective;
      else if (key == "maximize" || key == "maximum" || key == "max")
        throw ParseError("only minimization is supported", line_no);
      else if (key == "subject to" || key == "such that" || key == "st" || key == "s.t.") next = Section::Constraints;
      else if (key == "bounds" || key == "bound") next = Section::Bounds;
      else if (key == "general" || key == "generals" || key == "gen") next = Section::General;
      else if (key == "binary" || key == "binaries" || key == "bin") next = Section::Binary;
      else if (key == "end") next = Section::End;
      if (next != Section::None) {
        flush(pending);
        section_ = next;
        if (section_ == Section::End) break;
        continue;
      }
      auto toks = tokenize_line(line, line_no);
      if (toks.empty()) continue;
      if (section_ == Section::None) throw ParseError("content before the objective section", line_no);
      if (section_ == Section::Bounds) {
        bound_line(toks);
        continue;
      }
      if (section_ == Section::General || section_ == Section::Binary) {
        for (const Token& t : toks) {
          const int j = var(t.text, t.line);
          Variable& v = model_.variable(j);
          if (section_ == Section::Binary) {
            v.kind = VarKind::Binary;
            if (!explicit_bounds_[static_cast<std::size_t>(j)]) v.upper = 1.0;
          } else {
            v.kind = VarKind::Integer;
          }
        }
        continue;
      }
      // objective and constraint rows may continue over several lines; a new row starts at "name:"
      if (toks.size() >= 2 && toks[1].text == ":" && !pending.empty()) flush(pending);
      pending.insert(pending.end(), toks.begin(), toks.end());
    }
    flush(pending);
    for (const auto& [row, terms] : rows_) model_.add_row(row, terms);
    return std::move(model_);
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  int var(const std::string& name, int line) {
    double dummy;
    if (is_number(name, dummy) || name.empty()) throw ParseError("expected a variable name, got '" + name + "'", line);
    int j = model_.find_variable(name);
    if (j >= 0) return j;
    Variable v;
    v.name = name;
    v.lower = 0.0;
    v.upper = std::numeric_limits<double>::infinity();
    j = model_.add_variable(std::move(v));
    explicit_bounds_.push_back(false);
    return j;
  }

  // parses "[+|-] [coef] name" sequences up to a relational operator
  std::size_t expression(const std::vector<Token>& t, std::size_t k, std::vector<Term>& terms, double& constant) {
    while (k < t.size() && t[k].text != "<=" && t[k].text != ">=" && t[k].text != "=") {
      double sign = 1.0;
      while (k < t.size() && (t[k].text == "+" || t[k].text == "-")) {
        if (t[k].text == "-") sign = -sign;
        ++k;
      }
      if (k >= t.size()) throw ParseError("dangling sign", t.back().line);
      double coef = 1.0;
      double v;
      if (is_number(t[k].text, v)) {
        coef = v;
        ++k;
        if (k >= t.size() || t[k].text == "<=" || t[k].text == ">=" || t[k].text == "=" || t[k].text == "+" ||
            t[k].text == "-") {
          constant += sign * coef;
          continue;
        }
      }
      terms.push_back({var(t[k].text, t[k].line), sign * coef});
      ++k;
    }
    return k;
  }

  void flush(std::vector<Token>& t) {
    if (t.empty()) return;
    std::size_t k = 0;
    std::string name;
    if (t.size() >= 2 && t[1].text == ":") {
      name = t[0].text;
      k = 2;
    }
    std::vector<Term> terms;
    double constant = 0.0;
    if (section_ == Section::Objective) {
      k = expression(t, k, terms, constant);
      if (k != t.size()) throw ParseError("relational operator in the objective", t[k].line);
      for (const auto& [j, c] : terms) model_.set_objective(j, model_.objective()(j) + c);
      model_.set_objective_offset(model_.objective_offset() + constant);
    } else if (section_ == Section::Constraints) {
      k = expression(t, k, terms, constant);
      if (k + 1 >= t.size()) throw ParseError("constraint without right-hand side", t.back().line);
      Row row;
      row.name = name.empty() ? "r" + std::to_string(rows_.size()) : name;
      row.tag = tag_of(row.name);
      row.sense = t[k].text == "<=" ? Sense::LE : t[k].text == ">=" ? Sense::GE : Sense::EQ;
      ++k;
      double sign = 1.0;
      if (t[k].text == "-" || t[k].text == "+") {
        if (t[k].text == "-") sign = -1.0;
        ++k;
      }
      double rhs;
      if (k >= t.size() || !is_number(t[k].text, rhs)) throw ParseError("bad right-hand side", t.back().line);
      if (k + 1 != t.size()) throw ParseError("trailing tokens after right-hand side", t[k + 1].line);
      row.rhs = sign * rhs - constant;
      rows_.emplace_back(std::move(row), std::move(terms));
    }
    t.clear();
  }

  static bool signed_number(const std::vector<Token>& t, std::size_t& k, double& v) {
    double sign = 1.0;
    std::size_t q = k;
    if (q < t.size() && (t[q].text == "-" || t[q].text == "+")) {
      if (t[q].text == "-") sign = -1.0;
      ++q;
    }
    if (q < t.size() && is_number(t[q].text, v)) {
      v *= sign;
      k = q + 1;
      return true;
    }
    return false;
  }

  void bound_line(const std::vector<Token>& t) {
    const int line = t.front().line;
    std::size_t k = 0;
    double lo_val;
    if (signed_number(t, k, lo_val)) {
      // l <= x [<= u]
      if (k >= t.size() || t[k].text != "<=") throw ParseError("expected '<=' in bound", line);
      const int j = var(t[k + 1 < t.size() ? k + 1 : k].text, line);
      k += 2;
      Variable& v = model_.variable(j);
      v.lower = lo_val;
      if (k < t.size()) {
        double up;
        ++k;
        if (!signed_number(t, k, up)) throw ParseError("bad upper bound", line);
        v.upper = up;
      }
      explicit_bounds_[static_cast<std::size_t>(j)] = true;
      return;
    }
    const int j = var(t[0].text, line);
    Variable& v = model_.variable(j);
    explicit_bounds_[static_cast<std::size_t>(j)] = true;
    if (t.size() == 2 && lower(t[1].text) == "free") {
      v.lower = -std::numeric_limits<double>::infinity();
      v.upper = std::numeric_limits<double>::infinity();
      return;
    }
    if (t.size() < 3) throw ParseError("incomplete bound", line);
    k = 2;
    double val;
    if (!signed_number(t, k, val)) throw ParseError("bad bound value", line);
    if (t[1].text == "<=") v.upper = val;
    else if (t[1].text == ">=") v.lower = val;
    else v.lower = v.upper = val;
  }

  MilpModel model_;
  Section section_ = Section::None;
  std::vector<bool> explicit_bounds_;
  std::vector<std::pair<Row, std::vector<Term>>> rows_;
};

}  // namespace

MilpModel read_lp(std::istream& in) { return LpReader().read(in); }

MilpModel import_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_lp(in);
}

}  // namespace grove
