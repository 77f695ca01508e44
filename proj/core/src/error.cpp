#include "aam/error.hpp"

namespace aam {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "invalid_argument";
    case Errc::InvalidModel: return "invalid_model";
    case Errc::UnknownBus: return "unknown_bus";
    case Errc::UnknownBranch: return "unknown_branch";
    case Errc::IslandedNetwork: return "islanded_network";
    case Errc::SingularSystem: return "singular_system";
    case Errc::SingularInterior: return "singular_interior";
    case Errc::DegenerateArea: return "degenerate_area";
    case Errc::DimensionMismatch: return "dimension_mismatch";
    case Errc::NoBindingConstraint: return "no_binding_constraint";
    case Errc::EmptyCandidateSet: return "empty_candidate_set";
    case Errc::TooFewContingencies: return "too_few_contingencies";
    case Errc::EmptyResults: return "empty_results";
    case Errc::NoReachablePmu: return "no_reachable_pmu";
    case Errc::UnresolvableBus: return "unresolvable_bus";
    case Errc::NoReceivingBuses: return "no_receiving_buses";
    case Errc::OutOfOrderFrame: return "out_of_order_frame";
    case Errc::MalformedFrame: return "malformed_frame";
    case Errc::CrcMismatch: return "crc_mismatch";
    case Errc::MalformedRow: return "malformed_row";
    case Errc::BindFailure: return "bind_failure";
    case Errc::ServiceUnavailable: return "service_unavailable";
    case Errc::Io: return "io";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace aam
