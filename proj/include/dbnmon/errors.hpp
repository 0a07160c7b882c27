#pragma once

#include <stdexcept>
#include <string>

namespace dbnmon {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model, clustering, or configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File parsing / serialization failures.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Runtime inference failures (depletion, blowup, impossible evidence).
class InferenceError : public Error {
 public:
  using Error::Error;
};

/// All particle weights are zero; nothing left to resample.
class DepletionError : public InferenceError {
 public:
  using InferenceError::InferenceError;
};

/// An equijoin exceeded the configured row cap.
class JoinBlowupError : public InferenceError {
 public:
  using InferenceError::InferenceError;
};

/// Observed evidence has probability zero under the current belief.
class ImpossibleEvidenceError : public InferenceError {
 public:
  using InferenceError::InferenceError;
};

/// The joint state space exceeds the enumeration cap.
class JointTooLargeError : public InferenceError {
 public:
  using InferenceError::InferenceError;
};

/// Sample-join preprocessing pruned some cluster down to zero rows.
class EmptyJoinError : public InferenceError {
 public:
  using InferenceError::InferenceError;
};

}  // namespace dbnmon
