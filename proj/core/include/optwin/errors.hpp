#pragma once

#include <stdexcept>
#include <string>

namespace optwin {

enum class ErrorKind {
  Schema,         // scenario document shape: missing field, wrong type, unknown key
  Reference,      // dangling id between scenario sections
  Invariant,      // scenario-level physical/structural invariant violated
  Domain,         // argument outside an operation's domain
  ModelDomain,    // inputs outside the physical model's validity range
  LossOfSignal,   // channel power collapsed below the detectable floor
  Precondition,   // estimator/operation precondition not met
  RankDeficient,  // inverse problem underdetermined by the probe set
  Infeasible,     // no configuration/assignment satisfies the constraints
  Auth,           // unknown or revoked token
  Denied,         // capability check failed
  Conflict,       // resource already held
  Invalid,        // structurally valid request with unusable content
  NotFound,       // referenced entity does not exist
  Io,             // filesystem / serialization failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Reference: return "reference";
    case ErrorKind::Invariant: return "invariant";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::ModelDomain: return "model-domain";
    case ErrorKind::LossOfSignal: return "loss-of-signal";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::RankDeficient: return "rank-deficient";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Auth: return "auth";
    case ErrorKind::Denied: return "denied";
    case ErrorKind::Conflict: return "conflict";
    case ErrorKind::Invalid: return "invalid";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace optwin
