#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aam {

enum class Errc {
  InvalidArgument,
  InvalidModel,
  UnknownBus,
  UnknownBranch,
  IslandedNetwork,
  SingularSystem,
  SingularInterior,
  DegenerateArea,
  DimensionMismatch,
  NoBindingConstraint,
  EmptyCandidateSet,
  TooFewContingencies,
  EmptyResults,
  NoReachablePmu,
  UnresolvableBus,
  NoReceivingBuses,
  OutOfOrderFrame,
  MalformedFrame,
  CrcMismatch,
  MalformedRow,
  BindFailure,
  ServiceUnavailable,
  Io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace aam
