#pragma once

#include "mdrk/types.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mdrk {

enum class TableauStructure {
  SingleStage,
  DiagonallyImplicit,
  ExplicitFirstStageFullyImplicit,
  FullyImplicit,
};

std::string_view to_string(TableauStructure s);
TableauStructure parse_structure(std::string_view text);

/// Extended Butcher tableau of an r-derivative, s-stage scheme:
///
///   y^{n,l}  = y^n + sum_k dt^k sum_nu a[k](l,nu) * d^{k-1}Phi/dt^{k-1}(y^{n,nu})
///   y^{n+1}  = y^n + sum_k dt^k sum_l  b[k](l)    * d^{k-1}Phi/dt^{k-1}(y^{n,l})
///
/// `a[k]` and `b[k]` are indexed from k = 0 for the first derivative. Objects
/// are immutable; construction performs no checking, use validate().
class Tableau {
 public:
  Tableau(std::string name, int q, TableauStructure structure, std::vector<Matrix> a,
          std::vector<Vector> b, Vector c);

  const std::string& name() const { return name_; }
  int r() const { return static_cast<int>(a_.size()); }
  int s() const { return static_cast<int>(c_.size()); }
  int q() const { return q_; }
  TableauStructure structure() const { return structure_; }

  /// Coefficient matrix of derivative `k` (1-based, as in the scheme notation).
  const Matrix& a(int k) const { return a_.at(static_cast<std::size_t>(k - 1)); }
  const Vector& b(int k) const { return b_.at(static_cast<std::size_t>(k - 1)); }
  const Vector& c() const { return c_; }

  const std::vector<Matrix>& a_all() const { return a_; }
  const std::vector<Vector>& b_all() const { return b_; }

  /// Row `l` (0-based) of every a^(k) is zero: the stage equals y^n.
  bool stage_is_trivial(int l) const;
  /// a^(k)(l, nu) == 0 for nu >= l: the stage needs no solve.
  bool stage_is_explicit(int l) const;
  /// All a^(k) are lower triangular, so stages can be solved one at a time.
  bool is_lower_triangular() const;

 private:
  std::string name_;
  int q_;
  TableauStructure structure_;
  std::vector<Matrix> a_;
  std::vector<Vector> b_;
  Vector c_;
};

/// Returns the catalogue scheme called `name`. Accepted names are listed by
/// builtin_tableau_names(); Taylor families take any r >= 1 ("ImplTaylor-5").
/// Throws InvalidArgument for unknown names.
Tableau builtin_tableau(std::string_view name);
std::vector<std::string> builtin_tableau_names();

/// Human-readable list of invariant violations; empty when the tableau is valid.
std::vector<std::string> validate(const Tableau& t);

/// Parses the plain-text tableau format:
///
///   name r s q structure
///   r blocks of s lines with s numbers   (a^(1) .. a^(r))
///   r lines with s numbers               (b^(1) .. b^(r))
///   1 line with s numbers                (c)
///
/// Numbers are decimals or exact rationals "p/q"; rationals are converted
/// with a single rounding. Blank lines and '#' comments are ignored.
Tableau parse_tableau(std::string_view text);
std::string format_tableau(const Tableau& t);

/// Parses one coefficient ("0.25", "-1/12", "1e-3").
double parse_coefficient(std::string_view token);

}  // namespace mdrk
