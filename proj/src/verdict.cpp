#include "utb/verdict.hpp"

#include "utb/error.hpp"

namespace utb {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Trivial: return "Trivial";
    case Outcome::Nontrivial: return "Nontrivial";
    case Outcome::ConjecturalNontrivial: return "ConjecturalNontrivial";
    case Outcome::Unknown: return "Unknown";
  }
  return "Unknown";
}

const char* moment_class_name(MomentClass m) {
  switch (m) {
    case MomentClass::AnyFiniteEntropyNondegenerate: return "AnyFiniteEntropyNondegenerate";
    case MomentClass::CenteredFirstMoment: return "CenteredFirstMoment";
    case MomentClass::CenteredSecondMoment: return "CenteredSecondMoment";
    case MomentClass::SymmetricSecondMoment: return "SymmetricSecondMoment";
  }
  return "AnyFiniteEntropyNondegenerate";
}

Outcome outcome_from_name(const std::string& s) {
  for (Outcome o : {Outcome::Trivial, Outcome::Nontrivial, Outcome::ConjecturalNontrivial, Outcome::Unknown})
    if (s == outcome_name(o)) return o;
  throw Error(ErrorKind::Parse, "unknown outcome " + s);
}

MomentClass moment_class_from_name(const std::string& s) {
  for (MomentClass m : {MomentClass::AnyFiniteEntropyNondegenerate, MomentClass::CenteredFirstMoment,
                        MomentClass::CenteredSecondMoment, MomentClass::SymmetricSecondMoment})
    if (s == moment_class_name(m)) return m;
  throw Error(ErrorKind::Parse, "unknown moment class " + s);
}

}  // namespace utb
