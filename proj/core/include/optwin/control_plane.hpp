#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "optwin/model.hpp"

namespace optwin::control {

enum class LeaseState { Requested, Granted, Active, Released, Expired };

const char* lease_state_name(LeaseState s);

struct LeaseResource {
  enum class Kind { SpectrumSlot, Port, Compute };
  Kind kind = Kind::Port;
  std::string line_id;  // SpectrumSlot
  int slot_index = 0;   // SpectrumSlot
  std::string port_id;  // Port
  std::string dc_id;    // Compute
  double gb = 0.0;      // Compute
  double vcpu = 0.0;    // Compute

  std::string key() const;  // exclusivity key

  static LeaseResource spectrum_slot(const std::string& line_id, int slot);
  static LeaseResource port(const std::string& port_id);
  static LeaseResource compute(const std::string& dc_id, double gb, double vcpu);
};

struct Lease {
  std::string id;
  std::string lessor;
  std::string lessee;
  std::vector<LeaseResource> resources;
  LeaseState state = LeaseState::Requested;
  double requested_at_min = 0.0;
  double expires_at_min = 0.0;  // set on grant
  double duration_hours = 0.0;
};

struct DelegationContext {
  std::string id;
  std::string port_id;  // exactly one port per context
  std::string tenant;
  std::set<std::string> verbs;  // read-state, configure, read-telemetry
  std::string lease_id;
};

struct Session {
  std::string operator_id;
  std::string token;
};

struct CapabilityEntry {
  std::string resource;
  std::string verbs;
};

// Single authoritative control plane per scenario. Every mutation is
// linearized through one mutex, accepted mutations are appended to the audit
// log, and replaying that log against a fresh plane reproduces the state.
class ControlPlane {
 public:
  explicit ControlPlane(const Scenario& scenario);

  Session authenticate(const std::string& token) const;
  std::vector<CapabilityEntry> capabilities(const Session& session) const;

  std::string request_lease(const Session& session,
                            const std::vector<LeaseResource>& resources,
                            double duration_hours);
  void grant_lease(const Session& lessor, const std::string& lease_id);
  void release_lease(const Session& session, const std::string& lease_id);
  std::string delegate_port(const Session& owner, const std::string& port_id,
                            const std::string& tenant,
                            const std::set<std::string>& verbs);
  void configure_port(const Session& session, const std::string& port_id,
                      const PortConfig& config);
  void clear_port_config(const Session& session, const std::string& port_id);
  void record_port_measurement(const Session& session, const std::string& port_id,
                               double measured_gsnr_db);

  void advance_clock(double now_min);
  double now_min() const;

  std::optional<PortConfig> port_config(const std::string& port_id) const;
  std::optional<double> port_measurement(const std::string& port_id) const;
  std::vector<Lease> leases() const;
  std::vector<DelegationContext> delegations() const;

  // Wire protocol: one newline-delimited JSON request in, one response out.
  // Request {id, token, op, params}; op is get-state | edit-config | rpc.
  std::string handle_line(const std::string& request_json);

  const std::vector<std::string>& audit_log() const { return audit_; }
  std::string serialize_state() const;

  // Applies an audit log to this (fresh) plane and keeps the log, so state
  // survives process restarts.
  void restore_from_audit(const std::vector<std::string>& log);

  // Applies an audit log to a fresh plane built from the same scenario and
  // returns the serialized final state.
  static std::string replay_audit(const Scenario& scenario,
                                  const std::vector<std::string>& log);

 private:
  struct PortState {
    TransceiverPort descriptor;
    std::optional<PortConfig> config;
    std::optional<double> measured_gsnr_db;
  };

  // helpers below expect mu_ held
  bool owner_of_port(const std::string& op, const std::string& port_id) const;
  bool lease_covers(const std::string& lessee, const std::string& resource_key) const;
  const DelegationContext* delegation_for(const std::string& tenant,
                                          const std::string& port_id) const;
  void revoke_lease_locked(Lease& lease, LeaseState final_state, double at_min);
  void apply_event(const std::string& line);  // replay path
  std::string serialize_state_locked() const;

  mutable std::mutex mu_;
  double now_min_ = 0.0;
  std::map<std::string, std::string> token_to_operator_;
  std::map<std::string, PortState> ports_;
  std::map<std::string, std::string> line_owner_;
  std::map<std::string, int> line_slot_count_;
  std::map<std::string, std::string> dc_owner_;
  std::map<std::string, Lease> leases_;
  std::map<std::string, DelegationContext> delegations_;
  std::vector<std::string> audit_;
  std::uint64_t next_lease_ = 1;
  std::uint64_t next_context_ = 1;
  std::uint64_t replaying_ = 0;
};

}  // namespace optwin::control
