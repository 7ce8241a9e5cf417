#pragma once

#include <stdexcept>
#include <string>

namespace mrf {

enum class Errc {
  unknown_id,
  unknown_edge,
  degree_bound_violated,
  would_create_cycle,
  not_a_tree_edge,
  not_connected,
  no_cycle,
  empty_candidate_set,
  not_branch_free,
  already_portal,
  not_flat,
  master_degree_exceeded,
  infeasible_flow,
  threshold_reached,
  boundary_contact,
  oracle_failure,
  rounding_failed,
  parameter_infeasible,
  collection_budget_exceeded,
  not_a_routing_circulation,
  parse_error,
  disconnected,
  never_feasible,
  invariant_violation,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::unknown_id: return "unknown_id";
    case Errc::unknown_edge: return "unknown_edge";
    case Errc::degree_bound_violated: return "degree_bound_violated";
    case Errc::would_create_cycle: return "would_create_cycle";
    case Errc::not_a_tree_edge: return "not_a_tree_edge";
    case Errc::not_connected: return "not_connected";
    case Errc::no_cycle: return "no_cycle";
    case Errc::empty_candidate_set: return "empty_candidate_set";
    case Errc::not_branch_free: return "not_branch_free";
    case Errc::already_portal: return "already_portal";
    case Errc::not_flat: return "not_flat";
    case Errc::master_degree_exceeded: return "master_degree_exceeded";
    case Errc::infeasible_flow: return "infeasible_flow";
    case Errc::threshold_reached: return "threshold_reached";
    case Errc::boundary_contact: return "boundary_contact";
    case Errc::oracle_failure: return "oracle_failure";
    case Errc::rounding_failed: return "rounding_failed";
    case Errc::parameter_infeasible: return "parameter_infeasible";
    case Errc::collection_budget_exceeded: return "collection_budget_exceeded";
    case Errc::not_a_routing_circulation: return "not_a_routing_circulation";
    case Errc::parse_error: return "parse_error";
    case Errc::disconnected: return "disconnected";
    case Errc::never_feasible: return "never_feasible";
    case Errc::invariant_violation: return "invariant_violation";
  }
  return "unknown";
}

struct Error : std::runtime_error {
  Errc code;
  Error(Errc c, const std::string& what)
      : std::runtime_error(std::string(errc_name(c)) + ": " + what), code(c) {}
};

[[noreturn]] inline void fail(Errc c, const std::string& what) { throw Error(c, what); }

inline void require(bool ok, Errc c, const std::string& what) {
  if (!ok) fail(c, what);
}

}  // namespace mrf
