#include "utb/parse.hpp"

#include <cctype>

#include "utb/error.hpp"

namespace utb {

namespace {

class Parser {
 public:
  Parser(const std::string& s, const CoefficientField& f, int n) : s_(s), f_(f), n_(n) {}

  RationalFunction run() {
    RationalFunction r = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Parse, msg + " at offset " + std::to_string(pos_) + " in \"" + s_ + "\"");
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  RationalFunction expr() {
    RationalFunction acc = term();
    for (;;) {
      if (accept('+')) acc = acc + term();
      else if (accept('-')) acc = acc - term();
      else return acc;
    }
  }

  RationalFunction term() {
    RationalFunction acc = unary();
    for (;;) {
      if (accept('*')) {
        acc = acc * unary();
      } else if (accept('/')) {
        RationalFunction d = unary();
        if (d.is_zero()) fail("division by zero");
        acc = acc / d;
      } else {
        return acc;
      }
    }
  }

  RationalFunction unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  RationalFunction power() {
    RationalFunction base = atom();
    if (accept('^')) {
      skip();
      bool neg = false;
      if (accept('-')) neg = true;
      else accept('+');
      skip();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("expected integer exponent");
      long k = std::stol(s_.substr(start, pos_ - start));
      if (k > 100000) fail("exponent too large");
      if (neg && base.is_zero()) fail("negative power of zero");
      return base.pow(static_cast<int>(neg ? -k : k));
    }
    return base;
  }

  RationalFunction atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      RationalFunction r = expr();
      if (!accept(')')) fail("expected ')'");
      return r;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      mpz_class v(s_.substr(start, pos_ - start));
      return RationalFunction::constant(f_, n_, Coeff(v));
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      ++pos_;
      int idx = -1;
      if (u == 'X' && pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        idx = std::stoi(s_.substr(start, pos_ - start)) - 1;
      } else if (u == 'X' || u == 'Y' || u == 'Z') {
        if (n_ > 3) fail("letter variables need at most 3 variables; use X1..Xd");
        idx = u - 'X';
      } else {
        fail("unknown symbol");
      }
      if (idx < 0 || idx >= n_) fail("variable index out of range for " + std::to_string(n_) + " variables");
      return RationalFunction::variable(f_, n_, idx);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  CoefficientField f_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace

RationalFunction parse_rational(const std::string& text, const CoefficientField& f, int nvars) {
  if (nvars < 0) throw Error(ErrorKind::InvalidArgument, "negative variable count");
  return Parser(text, f, nvars).run();
}

LaurentPoly parse_laurent(const std::string& text, const CoefficientField& f, int nvars) {
  RationalFunction r = parse_rational(text, f, nvars);
  if (!r.is_laurent()) throw Error(ErrorKind::Parse, "not a Laurent polynomial: " + text);
  return r.num();
}

Json to_json(const LaurentPoly& p) {
  Json arr = Json::array();
  for (const auto& t : p.terms()) arr.push_back(Json{{"e", t.e}, {"c", t.c.get_str()}});
  return arr;
}

LaurentPoly laurent_from_json(const Json& j, const CoefficientField& f, int nvars) {
  if (j.is_string()) return parse_laurent(j.get<std::string>(), f, nvars);
  if (!j.is_array()) throw Error(ErrorKind::Parse, "polynomial must be a term list or string");
  std::vector<Term> terms;
  for (const auto& t : j) {
    Exponent e = t.at("e").get<Exponent>();
    Coeff c;
    try {
      c = Coeff(t.at("c").get<std::string>());
      c.canonicalize();
    } catch (const std::invalid_argument&) {
      throw Error(ErrorKind::Parse, "bad coefficient " + t.at("c").dump());
    }
    terms.push_back(Term{std::move(e), std::move(c)});
  }
  return LaurentPoly::from_terms(f, nvars, std::move(terms));
}

Json to_json(const RationalFunction& r) { return Json{{"num", to_json(r.num())}, {"den", to_json(r.den())}}; }

RationalFunction rational_from_json(const Json& j, const CoefficientField& f, int nvars) {
  if (j.is_string()) return parse_rational(j.get<std::string>(), f, nvars);
  return RationalFunction(laurent_from_json(j.at("num"), f, nvars), laurent_from_json(j.at("den"), f, nvars));
}

CoefficientField field_from_characteristic(std::uint64_t p) {
  return p == 0 ? CoefficientField::rationals() : CoefficientField::prime(p);
}

}  // namespace utb
