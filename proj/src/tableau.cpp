#include "mdrk/tableau.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace mdrk {
namespace {

constexpr double kConsistencyTol = 1e-12;

// Catalogue entries in the text format accepted by parse_tableau(). Rational
// entries stay exact until the one conversion to double at parse time.
const std::map<std::string, std::string, std::less<>>& catalogue() {
  static const std::map<std::string, std::string, std::less<>> tables = {
      {"HB-I2DRK4-2s", R"(
HB-I2DRK4-2s 2 2 4 ExplicitFirstStageFullyImplicit
0    0
1/2  1/2
0    0
1/12 -1/12
1/2  1/2
1/12 -1/12
0 1
)"},
      {"HB-I2DRK6-3s", R"(
HB-I2DRK6-3s 2 3 6 ExplicitFirstStageFullyImplicit
0        0         0
101/480  8/30      55/2400
7/30     16/30     7/30
0        0         0
65/4800  -25/600   -25/8000
5/300    0         -5/300
7/30     16/30     7/30
5/300    0         -5/300
0 1/2 1
)"},
      {"HB-I2DRK8-4s", R"(
HB-I2DRK8-4s 2 4 8 ExplicitFirstStageFullyImplicit
0           0           0           0
6893/54432  313/2016    89/2016     397/54432
223/1701    20/63       13/63       20/1701
31/224      81/224      81/224      31/224
0           0           0           0
1283/272160 -851/30240  -269/30240  -163/272160
43/8505     -16/945     -19/945     -8/8505
19/3360     -9/1120     9/1120      -19/3360
31/224      81/224      81/224      31/224
19/3360     -9/1120     9/1120      -19/3360
0 1/3 2/3 1
)"},
      {"HB-I3DRK6-2s", R"(
HB-I3DRK6-2s 3 2 6 ExplicitFirstStageFullyImplicit
0     0
1/2   1/2
0     0
1/10  -1/10
0     0
1/120 1/120
1/2   1/2
1/10  -1/10
1/120 1/120
0 1
)"},
      {"HB-I3DRK9-3s", R"(
HB-I3DRK9-3s 3 3 9 ExplicitFirstStageFullyImplicit
0            0       0
5669/26880   32/105  -421/26880
41/210       64/105  41/210
0            0       0
303/17920    -1/32   47/17920
1/70         0       -1/70
0            0       0
169/322560   1/315   -41/322560
1/2520       2/315   1/2520
41/210       64/105  41/210
1/70         0       -1/70
1/2520       2/315   1/2520
0 1/2 1
)"},
      {"HB-I4DRK8-2s", R"(
HB-I4DRK8-2s 4 2 8 ExplicitFirstStageFullyImplicit
0      0
1/2    1/2
0      0
3/28   -3/28
0      0
1/84   1/84
0      0
1/1680 -1/1680
1/2    1/2
3/28   -3/28
1/84   1/84
1/1680 -1/1680
0 1
)"},
      {"SSP-I2DRK3-2s", R"(
SSP-I2DRK3-2s 2 2 3 DiagonallyImplicit
0     0
0     1
-1/6  0
-1/6  -1/3
0     1
-1/6  -1/3
0 1
)"},
      {"SSP-I2DRK4-5s", R"(
SSP-I2DRK4-5s 2 5 4 DiagonallyImplicit
0.660949255604937 0                 0                 0                 0
0.660949255604937 0.242201390400848 0                 0                 0
0.660949255604937 0.221847558352979 1.137542996287740 0                 0
0.060653001401867 0.020022818960029 0.102668776898047 0.191388711018110 0
0.060653001401867 0.020022818960029 0.102668776898047 0.191388711018110 0.625266691721946
-0.177750705279127 0                  0                  0                  0
-0.177750705279127 -0.354733903778084 0                  0                  0
-0.177750705279127 -0.324923198367868 -0.403963513682271 0                  0
-0.016311560509453 -0.029325895786881 -0.036459667895230 -0.161628266349058 0
-0.016311560509453 -0.029325895786881 -0.036459667895230 -0.161628266349058 -0.218859021269943
0.060653001401867 0.020022818960029 0.102668776898047 0.191388711018110 0.625266691721946
-0.016311560509453 -0.029325895786881 -0.036459667895230 -0.161628266349058 -0.218859021269943
0.660949255604937 0.903150646005785 2.020339810245656 0.374733308278053 1.000000000000000
)"},
  };
  return tables;
}

// 1/k! as an exact rational converted once; k! fits in 64 bits for k <= 20.
double inverse_factorial(int k) {
  long long f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return 1.0 / static_cast<double>(f);
}

Tableau taylor(int r, bool implicit) {
  std::vector<Matrix> a;
  std::vector<Vector> b;
  for (int k = 1; k <= r; ++k) {
    const double coef = implicit ? ((k % 2 == 1) ? 1.0 : -1.0) * inverse_factorial(k) : 0.0;
    a.push_back(Matrix::Constant(1, 1, coef));
    const double weight = implicit ? coef : inverse_factorial(k);
    b.push_back(Vector::Constant(1, weight));
  }
  Vector c = Vector::Constant(1, implicit ? 1.0 : 0.0);
  std::string name = (implicit ? "ImplTaylor-" : "ExplTaylor-") + std::to_string(r);
  return Tableau(std::move(name), r, TableauStructure::SingleStage, std::move(a), std::move(b),
                 std::move(c));
}

std::string describe(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

class TokenStream {
 public:
  explicit TokenStream(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      std::istringstream words(line);
      std::vector<std::string> row;
      for (std::string w; words >> w;) row.push_back(w);
      if (!row.empty()) lines_.push_back(std::move(row));
    }
  }

  const std::vector<std::string>& next_line(std::size_t expected, const char* what) {
    if (pos_ >= lines_.size()) {
      throw InvalidArgument(std::string("tableau text ended early while reading ") + what);
    }
    const auto& row = lines_[pos_++];
    if (row.size() != expected) {
      throw InvalidArgument("tableau line " + std::to_string(pos_) + " (" + what + ") has " +
                            std::to_string(row.size()) + " entries, expected " +
                            std::to_string(expected));
    }
    return row;
  }

  bool exhausted() const { return pos_ >= lines_.size(); }

 private:
  std::vector<std::vector<std::string>> lines_;
  std::size_t pos_ = 0;
};

int parse_positive_int(const std::string& token, const char* what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || value <= 0) {
    throw InvalidArgument(std::string("tableau header: ") + what + " must be a positive integer, got '" +
                          token + "'");
  }
  return value;
}

}  // namespace

std::string_view to_string(TableauStructure s) {
  switch (s) {
    case TableauStructure::SingleStage: return "SingleStage";
    case TableauStructure::DiagonallyImplicit: return "DiagonallyImplicit";
    case TableauStructure::ExplicitFirstStageFullyImplicit: return "ExplicitFirstStageFullyImplicit";
    case TableauStructure::FullyImplicit: return "FullyImplicit";
  }
  return "?";
}

TableauStructure parse_structure(std::string_view text) {
  for (auto s : {TableauStructure::SingleStage, TableauStructure::DiagonallyImplicit,
                 TableauStructure::ExplicitFirstStageFullyImplicit, TableauStructure::FullyImplicit}) {
    if (to_string(s) == text) return s;
  }
  throw InvalidArgument("unknown tableau structure '" + std::string(text) + "'");
}

Tableau::Tableau(std::string name, int q, TableauStructure structure, std::vector<Matrix> a,
                 std::vector<Vector> b, Vector c)
    : name_(std::move(name)),
      q_(q),
      structure_(structure),
      a_(std::move(a)),
      b_(std::move(b)),
      c_(std::move(c)) {}

bool Tableau::stage_is_trivial(int l) const {
  return std::all_of(a_.begin(), a_.end(), [l](const Matrix& m) { return (m.row(l).array() == 0.0).all(); });
}

bool Tableau::stage_is_explicit(int l) const {
  for (const auto& m : a_) {
    for (int nu = l; nu < m.cols(); ++nu) {
      if (m(l, nu) != 0.0) return false;
    }
  }
  return true;
}

bool Tableau::is_lower_triangular() const {
  return std::all_of(a_.begin(), a_.end(), [](const Matrix& m) {
    for (int l = 0; l < m.rows(); ++l)
      for (int nu = l + 1; nu < m.cols(); ++nu)
        if (m(l, nu) != 0.0) return false;
    return true;
  });
}

double parse_coefficient(std::string_view token) {
  auto parse_double = [&](std::string_view t) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
      throw InvalidArgument("malformed tableau coefficient '" + std::string(token) + "'");
    }
    return v;
  };
  const auto slash = token.find('/');
  if (slash == std::string_view::npos) return parse_double(token);

  auto parse_int = [&](std::string_view t) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
      throw InvalidArgument("malformed rational coefficient '" + std::string(token) + "'");
    }
    return v;
  };
  const long long num = parse_int(token.substr(0, slash));
  const long long den = parse_int(token.substr(slash + 1));
  if (den == 0) throw InvalidArgument("zero denominator in '" + std::string(token) + "'");
  return static_cast<double>(num) / static_cast<double>(den);
}

Tableau parse_tableau(std::string_view text) {
  TokenStream in(text);
  const auto header = in.next_line(5, "header 'name r s q structure'");
  const int r = parse_positive_int(header[1], "r");
  const int s = parse_positive_int(header[2], "s");
  const int q = parse_positive_int(header[3], "q");
  const auto structure = parse_structure(header[4]);

  auto read_row = [&](const char* what) {
    const auto& row = in.next_line(static_cast<std::size_t>(s), what);
    Vector v(s);
    for (int i = 0; i < s; ++i) v(i) = parse_coefficient(row[static_cast<std::size_t>(i)]);
    return v;
  };

  std::vector<Matrix> a;
  for (int k = 0; k < r; ++k) {
    Matrix m(s, s);
    for (int l = 0; l < s; ++l) m.row(l) = read_row("a matrix row").transpose();
    a.push_back(std::move(m));
  }
  std::vector<Vector> b;
  for (int k = 0; k < r; ++k) b.push_back(read_row("b weights"));
  Vector c = read_row("abscissae c");
  if (!in.exhausted()) throw InvalidArgument("trailing content after tableau abscissae");
  return Tableau(header[0], q, structure, std::move(a), std::move(b), std::move(c));
}

std::string format_tableau(const Tableau& t) {
  std::ostringstream out;
  out << t.name() << ' ' << t.r() << ' ' << t.s() << ' ' << t.q() << ' ' << to_string(t.structure())
      << '\n';
  auto row = [&](const auto& v) {
    char buf[40];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v(i));
      out << (i ? " " : "") << buf;
    }
    out << '\n';
  };
  for (const auto& m : t.a_all())
    for (int l = 0; l < m.rows(); ++l) row(m.row(l));
  for (const auto& w : t.b_all()) row(w);
  row(t.c());
  return out.str();
}

Tableau builtin_tableau(std::string_view name) {
  auto taylor_order = [&](std::string_view prefix) -> int {
    if (name.substr(0, prefix.size()) != prefix) return 0;
    const auto digits = name.substr(prefix.size());
    int r = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), r);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || r < 1 || r > 20) return -1;
    return r;
  };
  if (int r = taylor_order("ImplTaylor-"); r > 0) return taylor(r, true);
  if (int r = taylor_order("ExplTaylor-"); r > 0) return taylor(r, false);

  const auto& tables = catalogue();
  if (auto it = tables.find(name); it != tables.end()) return parse_tableau(it->second);

  std::string msg = "unknown scheme '" + std::string(name) + "'; available:";
  for (const auto& n : builtin_tableau_names()) msg += " " + n;
  throw InvalidArgument(msg);
}

std::vector<std::string> builtin_tableau_names() {
  std::vector<std::string> names = {"ExplTaylor-<r>", "ImplTaylor-<r>"};
  for (const auto& [n, _] : catalogue()) names.push_back(n);
  return names;
}

std::vector<std::string> validate(const Tableau& t) {
  std::vector<std::string> issues;
  const int s = t.s();
  if (t.r() < 1) issues.emplace_back("r must be at least 1");
  if (s < 1) issues.emplace_back("s must be at least 1");
  if (t.q() < 1) issues.emplace_back("q must be at least 1");
  if (static_cast<int>(t.b_all().size()) != t.r()) {
    issues.push_back("expected " + std::to_string(t.r()) + " weight rows, got " +
                     std::to_string(t.b_all().size()));
  }
  bool shapes_ok = issues.empty();
  for (int k = 1; k <= t.r(); ++k) {
    const auto& m = t.a(k);
    if (m.rows() != s || m.cols() != s) {
      issues.push_back("a^(" + std::to_string(k) + ") is " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + ", expected " + std::to_string(s) + "x" +
                       std::to_string(s));
      shapes_ok = false;
    }
    if (k <= static_cast<int>(t.b_all().size()) && t.b(k).size() != s) {
      issues.push_back("b^(" + std::to_string(k) + ") has length " + std::to_string(t.b(k).size()) +
                       ", expected " + std::to_string(s));
      shapes_ok = false;
    }
  }
  if (!shapes_ok) return issues;

  const Matrix& a1 = t.a(1);
  for (int l = 0; l < s; ++l) {
    const double row_sum = a1.row(l).sum();
    if (std::abs(row_sum - t.c()(l)) > kConsistencyTol) {
      issues.push_back("stage " + std::to_string(l + 1) + ": Σ a^(1) = " + describe(row_sum) +
                       " ≠ c = " + describe(t.c()(l)));
    }
  }
  const double weight_sum = t.b(1).sum();
  if (std::abs(weight_sum - 1.0) > kConsistencyTol) {
    issues.push_back("Σ b^(1) = " + describe(weight_sum) + " ≠ 1");
  }

  switch (t.structure()) {
    case TableauStructure::SingleStage:
      if (s != 1) issues.emplace_back("SingleStage tableau must have s = 1");
      break;
    case TableauStructure::DiagonallyImplicit:
      if (!t.is_lower_triangular()) {
        issues.emplace_back("DiagonallyImplicit tableau has nonzero entries above the diagonal");
      }
      break;
    case TableauStructure::ExplicitFirstStageFullyImplicit:
      if (!t.stage_is_trivial(0)) {
        issues.emplace_back("ExplicitFirstStageFullyImplicit tableau has a nonzero first row");
      }
      break;
    case TableauStructure::FullyImplicit:
      break;
  }
  return issues;
}

}  // namespace mdrk
