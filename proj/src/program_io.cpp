// Text format (one record per line, whitespace separated):
//
//   opfrelax-program 1
//   variables <n>
//   <index> <name>                                  n lines
//   objective <constant> <k> <var> <coef> ...       affine expression
//   equalities <m>
//   <label> <constant> <k> <var> <coef> ...         m lines, expression == 0
//   cones <c>
//   <kind> <order> <entries> <label>                kind: nonneg | soc | rsoc | psd
//   <constant> <k> <var> <coef> ...                 one line per entry
//
// Labels and names never contain whitespace. PSD entries are the packed lower
// triangle, column-major, without scaling.

#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "opfrelax/conic.hpp"

namespace opfrelax {

namespace {

std::string sanitize(const std::string& s) {
  std::string out = s.empty() ? "_" : s;
  for (char& ch : out) {
    if (std::isspace(static_cast<unsigned char>(ch))) ch = '_';
  }
  return out;
}

void write_expr(std::ostream& out, const AffineExpr& e) {
  out << e.constant << ' ' << e.terms.size();
  for (const auto& [v, c] : e.terms) out << ' ' << v << ' ' << c;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
    }
    fail("unexpected end of input");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("program text, line " + std::to_string(line_no_) + ": " + what);
  }

  template <typename T>
  T read(std::istringstream& ss, const char* what) const {
    T v{};
    if (!(ss >> v)) fail(std::string("expected ") + what);
    return v;
  }

  void expect(std::istringstream& ss, const std::string& keyword) const {
    std::string word;
    if (!(ss >> word) || word != keyword) fail("expected '" + keyword + "'");
  }

  AffineExpr read_expr(std::istringstream& ss) const {
    AffineExpr e;
    e.constant = read<double>(ss, "constant");
    const auto k = read<long>(ss, "term count");
    if (k < 0) fail("negative term count");
    for (long i = 0; i < k; ++i) {
      const int v = read<int>(ss, "variable index");
      const double c = read<double>(ss, "coefficient");
      e.add(v, c);
    }
    return e;
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace

void write_program(std::ostream& out, const ConicProgram& program) {
  program.check();
  const auto old_precision = out.precision(17);
  out << "opfrelax-program 1\n";
  out << "variables " << program.num_vars << '\n';
  for (int i = 0; i < program.num_vars; ++i) {
    out << i << ' ' << sanitize(program.var_names[static_cast<std::size_t>(i)]) << '\n';
  }
  out << "objective ";
  write_expr(out, program.objective);
  out << '\n';
  out << "equalities " << program.equalities.size() << '\n';
  for (std::size_t i = 0; i < program.equalities.size(); ++i) {
    out << sanitize(program.equality_labels[i]) << ' ';
    write_expr(out, program.equalities[i]);
    out << '\n';
  }
  out << "cones " << program.cones.size() << '\n';
  for (const auto& cone : program.cones) {
    out << to_string(cone.kind) << ' ' << cone.order << ' ' << cone.entries.size() << ' '
        << sanitize(cone.label) << '\n';
    for (const auto& e : cone.entries) {
      write_expr(out, e);
      out << '\n';
    }
  }
  out.precision(old_precision);
}

ConicProgram read_program(std::istream& in) {
  LineReader reader(in);
  ConicProgram p;
  {
    auto ss = reader.next();
    reader.expect(ss, "opfrelax-program");
    if (reader.read<int>(ss, "version") != 1) reader.fail("unsupported version");
  }
  {
    auto ss = reader.next();
    reader.expect(ss, "variables");
    const int n = reader.read<int>(ss, "variable count");
    if (n < 0) reader.fail("negative variable count");
    for (int i = 0; i < n; ++i) {
      auto line = reader.next();
      if (reader.read<int>(line, "variable index") != i) reader.fail("variables out of order");
      p.add_variable(reader.read<std::string>(line, "variable name"));
    }
  }
  {
    auto ss = reader.next();
    reader.expect(ss, "objective");
    p.objective = reader.read_expr(ss);
    p.objective.normalize();
  }
  {
    auto ss = reader.next();
    reader.expect(ss, "equalities");
    const int m = reader.read<int>(ss, "equality count");
    for (int i = 0; i < m; ++i) {
      auto line = reader.next();
      auto label = reader.read<std::string>(line, "label");
      p.add_equality(reader.read_expr(line), std::move(label));
    }
  }
  {
    auto ss = reader.next();
    reader.expect(ss, "cones");
    const int count = reader.read<int>(ss, "cone count");
    for (int i = 0; i < count; ++i) {
      auto head = reader.next();
      const auto kind_name = reader.read<std::string>(head, "cone kind");
      const int order = reader.read<int>(head, "cone order");
      const int entries = reader.read<int>(head, "entry count");
      auto label = reader.read<std::string>(head, "label");
      std::vector<AffineExpr> exprs;
      for (int k = 0; k < entries; ++k) {
        auto line = reader.next();
        exprs.push_back(reader.read_expr(line));
      }
      if (kind_name == "psd") p.add_psd(order, std::move(exprs), std::move(label));
      else if (kind_name == "nonneg") p.add_cone(ConeKind::NonNegative, std::move(exprs), std::move(label));
      else if (kind_name == "soc") p.add_cone(ConeKind::SecondOrder, std::move(exprs), std::move(label));
      else if (kind_name == "rsoc") p.add_cone(ConeKind::RotatedSecondOrder, std::move(exprs), std::move(label));
      else reader.fail("unknown cone kind '" + kind_name + "'");
    }
  }
  try {
    p.check();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("program text: ") + e.what());
  }
  return p;
}

}  // namespace opfrelax
