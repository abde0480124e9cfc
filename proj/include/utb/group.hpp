#pragma once

#include <string>
#include <vector>

#include "utb/fingerprint.hpp"
#include "utb/parse.hpp"
#include "utb/ut_matrix.hpp"

namespace utb {

using ExactMatrix = UTMatrix<RationalFunction>;
using FpMatrix = UTMatrix<Fp>;

// 1-based matrix coordinate (i, j) with i < j
struct Pair {
  int i = 1;
  int j = 2;
  bool operator==(const Pair& o) const { return i == o.i && j == o.j; }
  bool operator!=(const Pair& o) const { return !(*this == o); }
  bool operator<(const Pair& o) const { return i != o.i ? i < o.i : j < o.j; }
  std::string str() const { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }
};

inline const RationalFunction& at(const ExactMatrix& m, Pair p) { return m(p.i - 1, p.j - 1); }

struct Letter {
  int gen = 0;
  bool inv = false;
  bool operator==(const Letter& o) const { return gen == o.gen && inv == o.inv; }
};
using Word = std::vector<Letter>;

Word inverse_word(const Word& w);

struct Generator {
  std::string name;
  ExactMatrix matrix;
};

class GroupSpec {
 public:
  GroupSpec() = default;
  GroupSpec(CoefficientField f, int nvars, int size);

  // validates shape, field, arity and invertibility
  void add_generator(const std::string& name, ExactMatrix m);
  void add_generator(const std::string& name, const std::vector<std::vector<std::string>>& rows);

  const CoefficientField& field() const { return field_; }
  int nvars() const { return nvars_; }
  int size() const { return size_; }
  const std::vector<Generator>& generators() const { return gens_; }
  int find(const std::string& name) const;
  bool diagonal_only() const;

  ExactMatrix identity() const;
  ExactMatrix letter_matrix(Letter l) const;
  ExactMatrix eval(const Word& w) const;

  Word parse_word(const std::vector<std::string>& letters) const;
  std::vector<std::string> word_letters(const Word& w) const;
  std::string format_word(const Word& w) const;

  Json to_json() const;
  static GroupSpec from_json(const Json& j);

 private:
  CoefficientField field_;
  int nvars_ = 0;
  int size_ = 0;
  std::vector<Generator> gens_;
  std::vector<ExactMatrix> inverses_;
};

Json matrix_json(const ExactMatrix& m);
ExactMatrix matrix_from_rows(const std::vector<std::vector<std::string>>& rows, const CoefficientField& f, int nvars);

struct UtDiag {
  std::vector<RationalFunction> diag;
  ExactMatrix unip;  // a = diag(d) * unip
};
UtDiag ut_part_and_diag(const ExactMatrix& a);

// Fingerprint images of the generators at three points where every
// generator entry is finite and every diagonal entry nonzero.
class GroupFingerprint {
 public:
  GroupFingerprint(const GroupSpec& spec, const FingerprintContext& ctx);

  const FingerprintRing& ring() const { return *ring_; }
  const FpMatrix& letter(Letter l) const {
    return l.inv ? inv_[static_cast<std::size_t>(l.gen)] : fwd_[static_cast<std::size_t>(l.gen)];
  }
  FpMatrix identity() const;
  FpMatrix eval(const Word& w) const;
  bool fingerprint(const RationalFunction& r, Fp& out) const;
  const std::vector<std::vector<std::uint64_t>>& points() const { return pts_; }

 private:
  const FingerprintRing* ring_;
  int size_;
  std::vector<std::vector<std::uint64_t>> pts_;
  std::vector<FpMatrix> fwd_, inv_;
};

std::uint64_t hash_matrix(const FpMatrix& m);

struct Atom {
  Word word;  // empty word: identity (lazification)
  double p = 0;
};

struct StepMeasure {
  std::vector<Atom> atoms;

  void validate(const GroupSpec& spec) const;
  bool symmetric(const GroupSpec& spec) const;
  Json to_json(const GroupSpec& spec) const;
  static StepMeasure from_json(const Json& j, const GroupSpec& spec);
};

}  // namespace utb
