#pragma once

#include <string>

namespace utb {

enum class Outcome { Trivial, Nontrivial, ConjecturalNontrivial, Unknown };
enum class MomentClass { AnyFiniteEntropyNondegenerate, CenteredFirstMoment, CenteredSecondMoment, SymmetricSecondMoment };

const char* outcome_name(Outcome o);
const char* moment_class_name(MomentClass m);
Outcome outcome_from_name(const std::string& s);
MomentClass moment_class_from_name(const std::string& s);

}  // namespace utb
