#include "utb/group.hpp"

#include <cmath>
#include <map>

namespace utb {

Word inverse_word(const Word& w) {
  Word r(w.rbegin(), w.rend());
  for (auto& l : r) l.inv = !l.inv;
  return r;
}

GroupSpec::GroupSpec(CoefficientField f, int nvars, int size) : field_(f), nvars_(nvars), size_(size) {
  if (nvars < 0) throw Error(ErrorKind::InvalidArgument, "negative variable count");
  if (size < 1) throw Error(ErrorKind::InvalidArgument, "matrix size must be positive");
}

void GroupSpec::add_generator(const std::string& name, ExactMatrix m) {
  if (name.empty() || name[0] == '~') throw Error(ErrorKind::InvalidArgument, "bad generator name '" + name + "'");
  if (find(name) >= 0) throw Error(ErrorKind::InvalidArgument, "duplicate generator " + name);
  if (m.size() != size_) throw Error(ErrorKind::ArityMismatch, "generator " + name + " has wrong size");
  for (const auto& x : m.data()) {
    if (x.field() != field_) throw Error(ErrorKind::FieldMismatch, "generator " + name);
    if (x.nvars() != nvars_) throw Error(ErrorKind::ArityMismatch, "generator " + name);
  }
  for (int i = 0; i < size_; ++i)
    if (m(i, i).is_zero()) throw Error(ErrorKind::DivisionByZero, "generator " + name + " is singular");
  inverses_.push_back(m.inverse());
  gens_.push_back(Generator{name, std::move(m)});
}

void GroupSpec::add_generator(const std::string& name, const std::vector<std::vector<std::string>>& rows) {
  if (static_cast<int>(rows.size()) != size_) throw Error(ErrorKind::ArityMismatch, "generator " + name + " rows");
  add_generator(name, matrix_from_rows(rows, field_, nvars_));
}

ExactMatrix matrix_from_rows(const std::vector<std::vector<std::string>>& rows, const CoefficientField& f, int nvars) {
  const int n = static_cast<int>(rows.size());
  ExactMatrix m(n, RationalFunction(f, nvars));
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw Error(ErrorKind::ArityMismatch, "matrix row length");
    for (int j = 0; j < n; ++j) {
      RationalFunction v = parse_rational(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], f, nvars);
      if (j < i) {
        if (!v.is_zero()) throw Error(ErrorKind::NotUpperTriangular, "nonzero entry below the diagonal");
      } else {
        m(i, j) = v;
      }
    }
  }
  return m;
}

int GroupSpec::find(const std::string& name) const {
  for (std::size_t i = 0; i < gens_.size(); ++i)
    if (gens_[i].name == name) return static_cast<int>(i);
  return -1;
}

bool GroupSpec::diagonal_only() const {
  for (const auto& g : gens_)
    if (!g.matrix.is_diagonal()) return false;
  return true;
}

ExactMatrix GroupSpec::identity() const { return ExactMatrix::identity(size_, RationalFunction(field_, nvars_)); }

ExactMatrix GroupSpec::letter_matrix(Letter l) const {
  if (l.gen < 0 || l.gen >= static_cast<int>(gens_.size())) throw Error(ErrorKind::UnknownGenerator, "index");
  return l.inv ? inverses_[static_cast<std::size_t>(l.gen)] : gens_[static_cast<std::size_t>(l.gen)].matrix;
}

ExactMatrix GroupSpec::eval(const Word& w) const {
  ExactMatrix m = identity();
  for (const auto& l : w) m = m * letter_matrix(l);
  return m;
}

Word GroupSpec::parse_word(const std::vector<std::string>& letters) const {
  Word w;
  for (const auto& s : letters) {
    std::string name = s;
    bool inv = false;
    if (!name.empty() && name[0] == '~') {
      inv = true;
      name = name.substr(1);
    } else if (name.size() > 3 && name.compare(name.size() - 3, 3, "^-1") == 0) {
      inv = true;
      name = name.substr(0, name.size() - 3);
    }
    int g = find(name);
    if (g < 0) throw Error(ErrorKind::UnknownGenerator, "'" + s + "'");
    w.push_back(Letter{g, inv});
  }
  return w;
}

std::vector<std::string> GroupSpec::word_letters(const Word& w) const {
  std::vector<std::string> out;
  for (const auto& l : w) out.push_back((l.inv ? "~" : "") + gens_[static_cast<std::size_t>(l.gen)].name);
  return out;
}

std::string GroupSpec::format_word(const Word& w) const {
  if (w.empty()) return "e";
  std::string s;
  for (const auto& x : word_letters(w)) s += (s.empty() ? "" : " ") + x;
  return s;
}

Json matrix_json(const ExactMatrix& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.size(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.size(); ++j) row.push_back(j < i ? std::string("0") : m(i, j).to_string());
    rows.push_back(row);
  }
  return rows;
}

Json GroupSpec::to_json() const {
  Json gens = Json::object();
  for (const auto& g : gens_) gens[g.name] = matrix_json(g.matrix);
  return Json{{"char", field_.characteristic()}, {"vars", nvars_}, {"size", size_}, {"generators", gens}};
}

GroupSpec GroupSpec::from_json(const Json& j) {
  try {
    GroupSpec s(field_from_characteristic(j.at("char").get<std::uint64_t>()), j.at("vars").get<int>(),
                j.at("size").get<int>());
    for (const auto& [name, rows] : j.at("generators").items())
      s.add_generator(name, rows.get<std::vector<std::vector<std::string>>>());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("group spec: ") + e.what());
  }
}

UtDiag ut_part_and_diag(const ExactMatrix& a) {
  UtDiag r;
  const int n = a.size();
  r.unip = a;
  for (int i = 0; i < n; ++i) {
    r.diag.push_back(a(i, i));
    RationalFunction inv = a(i, i).inverse();
    for (int j = i; j < n; ++j) r.unip(i, j) = inv * a(i, j);
  }
  return r;
}

GroupFingerprint::GroupFingerprint(const GroupSpec& spec, const FingerprintContext& ctx)
    : ring_(&FingerprintRing::for_field(spec.field())), size_(spec.size()) {
  std::size_t idx = 0;
  for (int k = 0; k < kFingerprintPoints; ++k) {
    for (;; ++idx) {
      if (idx > 256) throw Error(ErrorKind::AllPoles, "no evaluation point avoids poles of the generators");
      auto pt = ctx.point(idx, spec.nvars(), *ring_);
      bool ok = true;
      for (const auto& g : spec.generators()) {
        for (int i = 0; i < size_ && ok; ++i) {
          for (int j = i; j < size_ && ok; ++j) {
            std::uint64_t v;
            if (!ring_->eval(g.matrix(i, j), pt, v) || (i == j && v == 0)) ok = false;
          }
        }
      }
      if (ok) {
        pts_.push_back(pt);
        ++idx;
        break;
      }
    }
  }
  for (const auto& g : spec.generators()) {
    FpMatrix m(size_, Fp{ring_, {}});
    for (int i = 0; i < size_; ++i)
      for (int j = i; j < size_; ++j) fingerprint_at(g.matrix(i, j), *ring_, pts_, m(i, j));
    fwd_.push_back(m);
    inv_.push_back(m.inverse());
  }
}

FpMatrix GroupFingerprint::identity() const { return FpMatrix::identity(size_, Fp{ring_, {}}); }

FpMatrix GroupFingerprint::eval(const Word& w) const {
  FpMatrix m = identity();
  for (const auto& l : w) m = m * letter(l);
  return m;
}

bool GroupFingerprint::fingerprint(const RationalFunction& r, Fp& out) const {
  return fingerprint_at(r, *ring_, pts_, out);
}

std::uint64_t hash_matrix(const FpMatrix& m) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (const auto& x : m.data())
    for (auto c : x.v) h = mix64(h ^ c) + 0x9e3779b97f4a7c15ULL;
  return h;
}

void StepMeasure::validate(const GroupSpec& spec) const {
  if (atoms.empty()) throw Error(ErrorKind::InvalidArgument, "empty step measure");
  double total = 0;
  for (const auto& a : atoms) {
    if (!(a.p >= 0) || !std::isfinite(a.p)) throw Error(ErrorKind::InvalidArgument, "negative or non-finite weight");
    for (const auto& l : a.word)
      if (l.gen < 0 || l.gen >= static_cast<int>(spec.generators().size()))
        throw Error(ErrorKind::UnknownGenerator, "atom letter");
    total += a.p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorKind::InvalidArgument, "weights sum to " + std::to_string(total));
}

bool StepMeasure::symmetric(const GroupSpec& spec) const {
  GroupFingerprint fp(spec, FingerprintContext(0x5157));
  std::map<std::uint64_t, double> mass;
  for (const auto& a : atoms) mass[hash_matrix(fp.eval(a.word))] += a.p;
  for (const auto& a : atoms) {
    std::uint64_t h = hash_matrix(fp.eval(inverse_word(a.word)));
    auto it = mass.find(h);
    if (it == mass.end() || std::abs(it->second - mass[hash_matrix(fp.eval(a.word))]) > 1e-12) return false;
  }
  return true;
}

Json StepMeasure::to_json(const GroupSpec& spec) const {
  Json arr = Json::array();
  for (const auto& a : atoms) arr.push_back(Json{{"word", spec.word_letters(a.word)}, {"p", a.p}});
  return Json{{"atoms", arr}};
}

StepMeasure StepMeasure::from_json(const Json& j, const GroupSpec& spec) {
  StepMeasure m;
  try {
    for (const auto& a : j.at("atoms"))
      m.atoms.push_back(Atom{spec.parse_word(a.at("word").get<std::vector<std::string>>()), a.at("p").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("step measure: ") + e.what());
  }
  m.validate(spec);
  return m;
}

}  // namespace utb
