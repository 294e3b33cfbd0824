#include "optwin/control_plane.hpp"

#include <algorithm>

#include "json.hpp"
#include "optwin/json_io.hpp"

namespace optwin::control {

using nlohmann::json;

const char* lease_state_name(LeaseState s) {
  switch (s) {
    case LeaseState::Requested: return "requested";
    case LeaseState::Granted: return "granted";
    case LeaseState::Active: return "active";
    case LeaseState::Released: return "released";
    case LeaseState::Expired: return "expired";
  }
  return "unknown";
}

std::string LeaseResource::key() const {
  switch (kind) {
    case Kind::SpectrumSlot:
      return "slot:" + line_id + ":" + std::to_string(slot_index);
    case Kind::Port:
      return "port:" + port_id;
    case Kind::Compute:
      return "compute:" + dc_id;
  }
  return "?";
}

LeaseResource LeaseResource::spectrum_slot(const std::string& line_id, int slot) {
  LeaseResource r;
  r.kind = Kind::SpectrumSlot;
  r.line_id = line_id;
  r.slot_index = slot;
  return r;
}

LeaseResource LeaseResource::port(const std::string& port_id) {
  LeaseResource r;
  r.kind = Kind::Port;
  r.port_id = port_id;
  return r;
}

LeaseResource LeaseResource::compute(const std::string& dc_id, double gb, double vcpu) {
  LeaseResource r;
  r.kind = Kind::Compute;
  r.dc_id = dc_id;
  r.gb = gb;
  r.vcpu = vcpu;
  return r;
}

namespace {

json resource_to_json(const LeaseResource& r) {
  json j;
  switch (r.kind) {
    case LeaseResource::Kind::SpectrumSlot:
      j["kind"] = "spectrum_slot";
      j["line_id"] = r.line_id;
      j["slot_index"] = r.slot_index;
      break;
    case LeaseResource::Kind::Port:
      j["kind"] = "port";
      j["port_id"] = r.port_id;
      break;
    case LeaseResource::Kind::Compute:
      j["kind"] = "compute";
      j["dc_id"] = r.dc_id;
      j["gb"] = r.gb;
      j["vcpu"] = r.vcpu;
      break;
  }
  return j;
}

LeaseResource resource_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "spectrum_slot") {
    return LeaseResource::spectrum_slot(j.at("line_id").get<std::string>(),
                                        j.at("slot_index").get<int>());
  }
  if (kind == "port") return LeaseResource::port(j.at("port_id").get<std::string>());
  if (kind == "compute") {
    return LeaseResource::compute(j.at("dc_id").get<std::string>(),
                                  j.at("gb").get<double>(), j.at("vcpu").get<double>());
  }
  raise(ErrorKind::Invalid, "unknown resource kind: " + kind);
}

const std::set<std::string> kDelegationVerbs = {"read-state", "configure",
                                                "read-telemetry"};

}  // namespace

ControlPlane::ControlPlane(const Scenario& scenario) {
  for (const auto& op : scenario.operators) token_to_operator_[op.token] = op.id;
  for (const auto& p : scenario.transceivers) {
    PortState st;
    st.descriptor = p;
    ports_[p.id] = st;
  }
  for (const auto& line : scenario.line_systems) {
    line_owner_[line.id] = line.operator_id;
    line_slot_count_[line.id] = scenario.grid(line.grid_id).slot_count;
  }
  for (const auto& dc : scenario.data_centers) dc_owner_[dc.id] = dc.operator_id;
}

Session ControlPlane::authenticate(const std::string& token) const {
  std::lock_guard lock(mu_);
  auto it = token_to_operator_.find(token);
  if (it == token_to_operator_.end()) {
    raise(ErrorKind::Auth, "unknown or revoked token");
  }
  return Session{it->second, token};
}

std::vector<CapabilityEntry> ControlPlane::capabilities(const Session& session) const {
  std::lock_guard lock(mu_);
  std::vector<CapabilityEntry> caps;
  for (const auto& [id, st] : ports_) {
    if (st.descriptor.owner_operator == session.operator_id) {
      caps.push_back({"port:" + id, "read-state,configure,read-telemetry"});
    }
  }
  for (const auto& [id, owner] : line_owner_) {
    if (owner == session.operator_id) caps.push_back({"line:" + id, "configure"});
  }
  for (const auto& [id, lease] : leases_) {
    if (lease.state != LeaseState::Active || lease.lessee != session.operator_id) continue;
    for (const auto& r : lease.resources) caps.push_back({r.key(), "lease:" + id});
  }
  for (const auto& [id, ctx] : delegations_) {
    if (ctx.tenant != session.operator_id) continue;
    std::string verbs;
    for (const auto& v : ctx.verbs) verbs += (verbs.empty() ? "" : ",") + v;
    caps.push_back({"port:" + ctx.port_id, verbs});
  }
  std::sort(caps.begin(), caps.end(), [](const CapabilityEntry& a, const CapabilityEntry& b) {
    return a.resource < b.resource || (a.resource == b.resource && a.verbs < b.verbs);
  });
  return caps;
}

bool ControlPlane::owner_of_port(const std::string& op, const std::string& port_id) const {
  auto it = ports_.find(port_id);
  return it != ports_.end() && it->second.descriptor.owner_operator == op;
}

bool ControlPlane::lease_covers(const std::string& lessee,
                                const std::string& resource_key) const {
  for (const auto& [id, lease] : leases_) {
    if (lease.state != LeaseState::Active || lease.lessee != lessee) continue;
    for (const auto& r : lease.resources) {
      if (r.key() == resource_key) return true;
    }
  }
  return false;
}

const DelegationContext* ControlPlane::delegation_for(const std::string& tenant,
                                                      const std::string& port_id) const {
  for (const auto& [id, ctx] : delegations_) {
    if (ctx.tenant == tenant && ctx.port_id == port_id) return &ctx;
  }
  return nullptr;
}

std::string ControlPlane::request_lease(const Session& session,
                                        const std::vector<LeaseResource>& resources,
                                        double duration_hours) {
  std::lock_guard lock(mu_);
  if (resources.empty()) raise(ErrorKind::Invalid, "lease request without resources");
  if (duration_hours <= 0.0) raise(ErrorKind::Invalid, "lease duration must be > 0");

  std::string lessor;
  for (const auto& r : resources) {
    std::string owner;
    switch (r.kind) {
      case LeaseResource::Kind::SpectrumSlot: {
        auto it = line_owner_.find(r.line_id);
        if (it == line_owner_.end()) raise(ErrorKind::NotFound, "unknown line " + r.line_id);
        int slots = line_slot_count_.at(r.line_id);
        if (r.slot_index < 0 || r.slot_index >= slots) {
          raise(ErrorKind::Invalid, "slot index outside grid of line " + r.line_id);
        }
        owner = it->second;
        break;
      }
      case LeaseResource::Kind::Port: {
        auto it = ports_.find(r.port_id);
        if (it == ports_.end()) raise(ErrorKind::NotFound, "unknown port " + r.port_id);
        owner = it->second.descriptor.owner_operator;
        break;
      }
      case LeaseResource::Kind::Compute: {
        auto it = dc_owner_.find(r.dc_id);
        if (it == dc_owner_.end()) raise(ErrorKind::NotFound, "unknown data center " + r.dc_id);
        if (r.gb <= 0.0 && r.vcpu <= 0.0) {
          raise(ErrorKind::Invalid, "compute lease must request gb or vcpu");
        }
        owner = it->second;
        break;
      }
    }
    if (lessor.empty()) {
      lessor = owner;
    } else if (lessor != owner) {
      raise(ErrorKind::Invalid, "lease mixes resources of different owners");
    }
    // conflicts are checked against active leases at grant time as well;
    // rejecting early keeps requested leases honest
    for (const auto& [id, lease] : leases_) {
      if (lease.state != LeaseState::Active && lease.state != LeaseState::Requested) continue;
      for (const auto& held : lease.resources) {
        if (held.key() == r.key()) {
          raise(ErrorKind::Conflict, "resource " + r.key() + " already covered by lease " + id);
        }
      }
    }
  }
  if (lessor == session.operator_id) {
    raise(ErrorKind::Invalid, "cannot lease resources from yourself");
  }

  std::string id = "lease-" + std::to_string(next_lease_++);
  Lease lease;
  lease.id = id;
  lease.lessor = lessor;
  lease.lessee = session.operator_id;
  lease.resources = resources;
  lease.state = LeaseState::Requested;
  lease.requested_at_min = now_min_;
  lease.duration_hours = duration_hours;
  leases_[id] = lease;

  json ev;
  ev["event"] = "lease-requested";
  ev["t_min"] = now_min_;
  ev["actor"] = session.operator_id;
  ev["lease_id"] = id;
  ev["lessor"] = lessor;
  ev["duration_hours"] = duration_hours;
  json arr = json::array();
  for (const auto& r : resources) arr.push_back(resource_to_json(r));
  ev["resources"] = arr;
  if (!replaying_) audit_.push_back(canonical_dump(ev, 0));
  return id;
}

void ControlPlane::grant_lease(const Session& lessor, const std::string& lease_id) {
  std::lock_guard lock(mu_);
  auto it = leases_.find(lease_id);
  if (it == leases_.end()) raise(ErrorKind::NotFound, "unknown lease " + lease_id);
  Lease& lease = it->second;
  if (lease.lessor != lessor.operator_id) {
    raise(ErrorKind::Denied, "only the owning operator may grant lease " + lease_id);
  }
  if (lease.state != LeaseState::Requested) {
    raise(ErrorKind::Invalid, "lease " + lease_id + " is " + lease_state_name(lease.state));
  }
  for (const auto& r : lease.resources) {
    for (const auto& [id, other] : leases_) {
      if (id == lease_id || other.state != LeaseState::Active) continue;
      for (const auto& held : other.resources) {
        if (held.key() == r.key()) {
          raise(ErrorKind::Conflict,
                "resource " + r.key() + " already active under lease " + id);
        }
      }
    }
  }
  lease.state = LeaseState::Active;  // granted -> active immediately
  lease.expires_at_min = now_min_ + lease.duration_hours * 60.0;

  json ev;
  ev["event"] = "lease-granted";
  ev["t_min"] = now_min_;
  ev["actor"] = lessor.operator_id;
  ev["lease_id"] = lease_id;
  ev["expires_at_min"] = lease.expires_at_min;
  if (!replaying_) audit_.push_back(canonical_dump(ev, 0));
}

void ControlPlane::revoke_lease_locked(Lease& lease, LeaseState final_state,
                                       double at_min) {
  lease.state = final_state;
  std::vector<std::string> to_remove;
  for (const auto& [id, ctx] : delegations_) {
    if (ctx.lease_id == lease.id) to_remove.push_back(id);
  }
  for (const auto& id : to_remove) {
    json ev;
    ev["event"] = "delegation-revoked";
    ev["t_min"] = at_min;
    ev["actor"] = lease.lessor;
    ev["context_id"] = id;
    delegations_.erase(id);
    if (!replaying_) audit_.push_back(canonical_dump(ev, 0));
  }
}

void ControlPlane::release_lease(const Session& session, const std::string& lease_id) {
  std::lock_guard lock(mu_);
  auto it = leases_.find(lease_id);
  if (it == leases_.end()) raise(ErrorKind::NotFound, "unknown lease " + lease_id);
  Lease& lease = it->second;
  if (session.operator_id != lease.lessor && session.operator_id != lease.lessee) {
    raise(ErrorKind::Denied, "lease " + lease_id + " does not involve " + session.operator_id);
  }
  if (lease.state != LeaseState::Active && lease.state != LeaseState::Requested) {
    raise(ErrorKind::Invalid, "lease " + lease_id + " already " + lease_state_name(lease.state));
  }
  json ev;
  ev["event"] = "lease-released";
  ev["t_min"] = now_min_;
  ev["actor"] = session.operator_id;
  ev["lease_id"] = lease_id;
  if (!replaying_) audit_.push_back(canonical_dump(ev, 0));
  revoke_lease_locked(lease, LeaseState::Released, now_min_);
}

std::string ControlPlane::delegate_port(const Session& owner, const std::string& port_id,
                                        const std::string& tenant,
                                        const std::set<std::string>& verbs) {
  std::lock_guard lock(mu_);
  auto it = ports_.find(port_id);
  if (it == ports_.end()) raise(ErrorKind::NotFound, "unknown port " + port_id);
  if (it->second.descriptor.owner_operator != owner.operator_id) {
    raise(ErrorKind::Denied, "port " + port_id + " is not owned by " + owner.operator_id);
  }
  if (tenant == owner.operator_id) {
    raise(ErrorKind::Invalid, "delegation tenant must differ from the owner");
  }
  for (const auto& v : verbs) {
    if (!kDelegationVerbs.count(v)) raise(ErrorKind::Invalid, "unknown verb " + v);
  }
  // an active lease held by the tenant must cover the port
  bool covered = false;
  std::string lease_id;
  for (const auto& [id, lease] : leases_) {
    if (lease.state != LeaseState::Active || lease.lessee != tenant) continue;
    for (const auto& r : lease.resources) {
      if (r.kind == LeaseResource::Kind::Port && r.port_id == port_id) {
        covered = true;
        lease_id = id;
      }
    }
  }
  if (!covered) {
    raise(ErrorKind::Precondition, "no active lease of " + tenant + " covers port " + port_id);
  }
  for (const auto& [id, ctx] : delegations_) {
    if (ctx.port_id == port_id) {
      raise(ErrorKind::Conflict, "port " + port_id + " already delegated via " + id);
    }
  }

  std::string id = "ctx-" + std::to_string(next_context_++);
  DelegationContext ctx;
  ctx.id = id;
  ctx.port_id = port_id;
  ctx.tenant = tenant;
  ctx.verbs = verbs;
  ctx.lease_id = lease_id;
  delegations_[id] = ctx;

  json ev;
  ev["event"] = "port-delegated";
  ev["t_min"] = now_min_;
  ev["actor"] = owner.operator_id;
  ev["context_id"] = id;
  ev["port_id"] = port_id;
  ev["tenant"] = tenant;
  ev["lease_id"] = lease_id;
  json varr = json::array();
  for (const auto& v : verbs) varr.push_back(v);
  ev["verbs"] = varr;
  if (!replaying_) audit_.push_back(canonical_dump(ev, 0));
  return id;
}

void ControlPlane::configure_port(const Session& session, const std::string& port_id,
                                  const PortConfig& config) {
  std::lock_guard lock(mu_);
  auto it = ports_.find(port_id);
  if (it == ports_.end()) raise(ErrorKind::NotFound, "unknown port " + port_id);
  PortState& port = it->second;

  bool is_owner = port.descriptor.owner_operator == session.operator_id;
  const DelegationContext* ctx = delegation_for(session.operator_id, port_id);
  if (!is_owner) {
    if (ctx == nullptr) {
      raise(ErrorKind::Denied, "no delegation context grants " + session.operator_id +
                                   " access to port " + port_id);
    }
    if (!ctx->verbs.count("configure")) {
      raise(ErrorKind::Denied, "delegation " + ctx->id + " lacks the configure verb");
    }
  }

  bool supported = false;
  for (const auto& f : port.descriptor.supported_format_ids) {
    supported = supported || f == config.format_id;
  }
  if (!supported) {
    raise(ErrorKind::Invalid,
          "port " + port_id + " does not support format " + config.format_id);
  }
  for (const auto& [other_id, other] : ports_) {
    if (other_id == port_id || !other.config) continue;
    if (other.descriptor.node_id == port.descriptor.node_id &&
        other.config->slot_index == config.slot_index) {
      raise(ErrorKind::Invalid, "slot " + std::to_string(config.slot_index) +
                                    " already occupied by port " + other_id);
    }
  }

  port.config = config;
  json ev;
  ev["event"] = "port-configured";
  ev["t_min"] = now_min_;
  ev["actor"] = session.operator_id;
  ev["port_id"] = port_id;
  ev["slot_index"] = config.slot_index;
  ev["format_id"] = config.format_id;
  ev["launch_power_dbm"] = config.launch_power_dbm;
  if (!replaying_) audit_.push_back(canonical_dump(ev, 0));
}

void ControlPlane::clear_port_config(const Session& session, const std::string& port_id) {
  std::lock_guard lock(mu_);
  auto it = ports_.find(port_id);
  if (it == ports_.end()) raise(ErrorKind::NotFound, "unknown port " + port_id);
  bool is_owner = it->second.descriptor.owner_operator == session.operator_id;
  const DelegationContext* ctx = delegation_for(session.operator_id, port_id);
  if (!is_owner && (ctx == nullptr || !ctx->verbs.count("configure"))) {
    raise(ErrorKind::Denied, "no configure capability for port " + port_id);
  }
  it->second.config.reset();
  json ev;
  ev["event"] = "port-cleared";
  ev["t_min"] = now_min_;
  ev["actor"] = session.operator_id;
  ev["port_id"] = port_id;
  if (!replaying_) audit_.push_back(canonical_dump(ev, 0));
}

void ControlPlane::record_port_measurement(const Session& session,
                                           const std::string& port_id,
                                           double measured_gsnr_db) {
  std::lock_guard lock(mu_);
  auto it = ports_.find(port_id);
  if (it == ports_.end()) raise(ErrorKind::NotFound, "unknown port " + port_id);
  bool is_owner = it->second.descriptor.owner_operator == session.operator_id;
  const DelegationContext* ctx = delegation_for(session.operator_id, port_id);
  if (!is_owner && (ctx == nullptr || !ctx->verbs.count("read-telemetry"))) {
    raise(ErrorKind::Denied, "no telemetry capability for port " + port_id);
  }
  it->second.measured_gsnr_db = measured_gsnr_db;
  json ev;
  ev["event"] = "port-measurement";
  ev["t_min"] = now_min_;
  ev["actor"] = session.operator_id;
  ev["port_id"] = port_id;
  ev["measured_gsnr_db"] = measured_gsnr_db;
  if (!replaying_) audit_.push_back(canonical_dump(ev, 0));
}

void ControlPlane::advance_clock(double now_min) {
  std::lock_guard lock(mu_);
  if (now_min < now_min_) raise(ErrorKind::Domain, "clock may not move backwards");
  now_min_ = now_min;
  for (auto& [id, lease] : leases_) {
    if (lease.state == LeaseState::Active && now_min_ >= lease.expires_at_min - 1e-9) {
      json ev;
      ev["event"] = "lease-expired";
      ev["t_min"] = now_min_;
      ev["actor"] = "clock";
      ev["lease_id"] = id;
      if (!replaying_) audit_.push_back(canonical_dump(ev, 0));
      revoke_lease_locked(lease, LeaseState::Expired, now_min_);
    }
  }
}

double ControlPlane::now_min() const {
  std::lock_guard lock(mu_);
  return now_min_;
}

std::optional<PortConfig> ControlPlane::port_config(const std::string& port_id) const {
  std::lock_guard lock(mu_);
  auto it = ports_.find(port_id);
  if (it == ports_.end()) raise(ErrorKind::NotFound, "unknown port " + port_id);
  return it->second.config;
}

std::optional<double> ControlPlane::port_measurement(const std::string& port_id) const {
  std::lock_guard lock(mu_);
  auto it = ports_.find(port_id);
  if (it == ports_.end()) raise(ErrorKind::NotFound, "unknown port " + port_id);
  return it->second.measured_gsnr_db;
}

std::vector<Lease> ControlPlane::leases() const {
  std::lock_guard lock(mu_);
  std::vector<Lease> out;
  for (const auto& [id, lease] : leases_) out.push_back(lease);
  return out;
}

std::vector<DelegationContext> ControlPlane::delegations() const {
  std::lock_guard lock(mu_);
  std::vector<DelegationContext> out;
  for (const auto& [id, ctx] : delegations_) out.push_back(ctx);
  return out;
}

std::string ControlPlane::serialize_state_locked() const {
  json state;
  json leases = json::array();
  for (const auto& [id, lease] : leases_) {
    json lj;
    lj["id"] = lease.id;
    lj["lessor"] = lease.lessor;
    lj["lessee"] = lease.lessee;
    lj["state"] = lease_state_name(lease.state);
    lj["requested_at_min"] = lease.requested_at_min;
    lj["expires_at_min"] = lease.expires_at_min;
    lj["duration_hours"] = lease.duration_hours;
    json arr = json::array();
    for (const auto& r : lease.resources) arr.push_back(resource_to_json(r));
    lj["resources"] = arr;
    leases.push_back(lj);
  }
  state["leases"] = leases;
  json delegations = json::array();
  for (const auto& [id, ctx] : delegations_) {
    json dj;
    dj["id"] = ctx.id;
    dj["port_id"] = ctx.port_id;
    dj["tenant"] = ctx.tenant;
    dj["lease_id"] = ctx.lease_id;
    json varr = json::array();
    for (const auto& v : ctx.verbs) varr.push_back(v);
    dj["verbs"] = varr;
    delegations.push_back(dj);
  }
  state["delegations"] = delegations;
  json ports = json::array();
  for (const auto& [id, st] : ports_) {
    json pj;
    pj["id"] = id;
    if (st.config) {
      pj["config"] = {{"slot_index", st.config->slot_index},
                      {"format_id", st.config->format_id},
                      {"launch_power_dbm", st.config->launch_power_dbm}};
    } else {
      pj["config"] = nullptr;
    }
    if (st.measured_gsnr_db) {
      pj["measured_gsnr_db"] = *st.measured_gsnr_db;
    } else {
      pj["measured_gsnr_db"] = nullptr;
    }
    ports.push_back(pj);
  }
  state["ports"] = ports;
  state["next_lease"] = next_lease_;
  state["next_context"] = next_context_;
  state["now_min"] = now_min_;
  return canonical_dump(state);
}

std::string ControlPlane::serialize_state() const {
  std::lock_guard lock(mu_);
  return serialize_state_locked();
}

void ControlPlane::apply_event(const std::string& line) {
  json ev = json::parse(line);
  std::string type = ev.at("event").get<std::string>();
  double t = ev.at("t_min").get<double>();
  std::string actor = ev.value("actor", "");
  now_min_ = t;
  if (type == "lease-requested") {
    Lease lease;
    lease.id = ev.at("lease_id").get<std::string>();
    lease.lessor = ev.at("lessor").get<std::string>();
    lease.lessee = actor;
    lease.state = LeaseState::Requested;
    lease.requested_at_min = t;
    lease.duration_hours = ev.at("duration_hours").get<double>();
    for (const auto& rj : ev.at("resources")) lease.resources.push_back(resource_from_json(rj));
    leases_[lease.id] = lease;
    std::uint64_t n = std::stoull(lease.id.substr(lease.id.find('-') + 1));
    next_lease_ = std::max(next_lease_, n + 1);
  } else if (type == "lease-granted") {
    Lease& lease = leases_.at(ev.at("lease_id").get<std::string>());
    lease.state = LeaseState::Active;
    lease.expires_at_min = ev.at("expires_at_min").get<double>();
  } else if (type == "lease-released") {
    Lease& lease = leases_.at(ev.at("lease_id").get<std::string>());
    revoke_lease_locked(lease, LeaseState::Released, t);
  } else if (type == "lease-expired") {
    Lease& lease = leases_.at(ev.at("lease_id").get<std::string>());
    revoke_lease_locked(lease, LeaseState::Expired, t);
  } else if (type == "port-delegated") {
    DelegationContext ctx;
    ctx.id = ev.at("context_id").get<std::string>();
    ctx.port_id = ev.at("port_id").get<std::string>();
    ctx.tenant = ev.at("tenant").get<std::string>();
    ctx.lease_id = ev.at("lease_id").get<std::string>();
    for (const auto& v : ev.at("verbs")) ctx.verbs.insert(v.get<std::string>());
    delegations_[ctx.id] = ctx;
    std::uint64_t n = std::stoull(ctx.id.substr(ctx.id.find('-') + 1));
    next_context_ = std::max(next_context_, n + 1);
  } else if (type == "delegation-revoked") {
    delegations_.erase(ev.at("context_id").get<std::string>());
  } else if (type == "port-configured") {
    PortConfig cfg;
    cfg.slot_index = ev.at("slot_index").get<int>();
    cfg.format_id = ev.at("format_id").get<std::string>();
    cfg.launch_power_dbm = ev.at("launch_power_dbm").get<double>();
    ports_.at(ev.at("port_id").get<std::string>()).config = cfg;
  } else if (type == "port-cleared") {
    ports_.at(ev.at("port_id").get<std::string>()).config.reset();
  } else if (type == "port-measurement") {
    ports_.at(ev.at("port_id").get<std::string>()).measured_gsnr_db =
        ev.at("measured_gsnr_db").get<double>();
  } else {
    raise(ErrorKind::Invalid, "unknown audit event " + type);
  }
}

void ControlPlane::restore_from_audit(const std::vector<std::string>& log) {
  std::lock_guard lock(mu_);
  replaying_ = 1;
  for (const auto& line : log) {
    apply_event(line);
    audit_.push_back(line);
  }
  replaying_ = 0;
}

std::string ControlPlane::replay_audit(const Scenario& scenario,
                                       const std::vector<std::string>& log) {
  ControlPlane plane(scenario);
  plane.replaying_ = 1;
  for (const auto& line : log) plane.apply_event(line);
  plane.replaying_ = 0;
  return plane.serialize_state();
}

// ---------------------------------------------------------------------------
// Wire protocol
// ---------------------------------------------------------------------------

namespace {

const char* wire_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Auth: return "AUTH";
    case ErrorKind::Denied: return "DENIED";
    case ErrorKind::Conflict: return "CONFLICT";
    case ErrorKind::NotFound: return "NOTFOUND";
    default: return "INVALID";
  }
}

}  // namespace

std::string ControlPlane::handle_line(const std::string& request_json) {
  json response;
  json request;
  try {
    request = json::parse(request_json);
  } catch (const json::exception&) {
    response["id"] = nullptr;
    response["status"] = "error";
    response["error"] = {{"code", "INVALID"}, {"detail", "request is not valid JSON"}};
    return canonical_dump(response, 0);
  }
  response["id"] = request.contains("id") ? request["id"] : json(nullptr);
  try {
    std::string token = request.at("token").get<std::string>();
    std::string op = request.at("op").get<std::string>();
    json params = request.value("params", json::object());
    Session session = authenticate(token);

    json result;
    if (op == "get-state") {
      std::string path = params.value("path", std::string("capabilities"));
      if (path == "capabilities") {
        json arr = json::array();
        for (const auto& c : capabilities(session)) {
          arr.push_back({{"resource", c.resource}, {"verbs", c.verbs}});
        }
        result["operator_id"] = session.operator_id;
        result["capabilities"] = arr;
      } else if (path == "leases") {
        json arr = json::array();
        for (const auto& lease : leases()) {
          arr.push_back({{"id", lease.id},
                         {"state", lease_state_name(lease.state)},
                         {"lessor", lease.lessor},
                         {"lessee", lease.lessee}});
        }
        result["leases"] = arr;
      } else if (path.rfind("ports/", 0) == 0) {
        std::string rest = path.substr(6);
        auto slash = rest.find('/');
        std::string port_id = slash == std::string::npos ? rest : rest.substr(0, slash);
        std::string leaf = slash == std::string::npos ? "state" : rest.substr(slash + 1);
        {
          std::lock_guard lock(mu_);
          auto it = ports_.find(port_id);
          if (it == ports_.end()) raise(ErrorKind::NotFound, "unknown port " + port_id);
          bool is_owner = it->second.descriptor.owner_operator == session.operator_id;
          const DelegationContext* ctx = delegation_for(session.operator_id, port_id);
          std::string verb = leaf == "telemetry" ? "read-telemetry" : "read-state";
          if (!is_owner && (ctx == nullptr || !ctx->verbs.count(verb))) {
            raise(ErrorKind::Denied, "no " + verb + " capability for port " + port_id);
          }
          if (leaf == "telemetry") {
            result["port_id"] = port_id;
            result["measured_gsnr_db"] =
                it->second.measured_gsnr_db ? json(*it->second.measured_gsnr_db)
                                            : json(nullptr);
          } else {
            result["port_id"] = port_id;
            result["owner_operator"] = it->second.descriptor.owner_operator;
            result["configured"] = it->second.config.has_value();
            if (it->second.config) {
              result["config"] = {{"slot_index", it->second.config->slot_index},
                                  {"format_id", it->second.config->format_id},
                                  {"launch_power_dbm", it->second.config->launch_power_dbm}};
            }
          }
        }
      } else {
        raise(ErrorKind::NotFound, "unknown state path " + path);
      }
    } else if (op == "edit-config") {
      PortConfig cfg;
      cfg.slot_index = params.at("config").at("slot_index").get<int>();
      cfg.format_id = params.at("config").at("format_id").get<std::string>();
      cfg.launch_power_dbm = params.at("config").at("launch_power_dbm").get<double>();
      configure_port(session, params.at("port_id").get<std::string>(), cfg);
      result["applied"] = true;
    } else if (op == "rpc") {
      std::string method = params.at("method").get<std::string>();
      if (method == "authenticate") {
        result["operator_id"] = session.operator_id;
      } else if (method == "request-lease") {
        std::vector<LeaseResource> resources;
        for (const auto& rj : params.at("resources")) {
          resources.push_back(resource_from_json(rj));
        }
        result["lease_id"] =
            request_lease(session, resources, params.at("duration_hours").get<double>());
      } else if (method == "grant-lease") {
        grant_lease(session, params.at("lease_id").get<std::string>());
        result["granted"] = true;
      } else if (method == "release-lease") {
        release_lease(session, params.at("lease_id").get<std::string>());
        result["released"] = true;
      } else if (method == "delegate-port") {
        std::set<std::string> verbs;
        for (const auto& v : params.at("verbs")) verbs.insert(v.get<std::string>());
        result["context_id"] =
            delegate_port(session, params.at("port_id").get<std::string>(),
                          params.at("tenant").get<std::string>(), verbs);
      } else {
        raise(ErrorKind::Invalid, "unknown rpc method " + method);
      }
    } else {
      raise(ErrorKind::Invalid, "unknown op " + op);
    }
    response["status"] = "ok";
    response["result"] = result;
  } catch (const Error& e) {
    response["status"] = "error";
    response["error"] = {{"code", wire_code(e.kind())}, {"detail", e.what()}};
  } catch (const json::exception& e) {
    response["status"] = "error";
    response["error"] = {{"code", "INVALID"},
                         {"detail", std::string("malformed request: ") + e.what()}};
  }
  return canonical_dump(response, 0);
}

}  // namespace optwin::control
