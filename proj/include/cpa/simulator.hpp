#pragma once

// Master/worker execution of the encode -> compute -> decode protocol over
// message passing. Every worker is its own activity with a private inbox; the
// master only ever sees what arrives in its own inbox.
//
// Time is a logical tick count. An Assign to worker n is stamped with its
// delivery tick a_n; the worker's Response is stamped a_n + 1 + r_n. The
// latencies a_n, r_n are drawn from (seed, n) alone, so the trace is the same
// whatever order the threads happen to run in.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cpa/numerics.hpp"
#include "cpa/pipeline.hpp"
#include "cpa/scheme.hpp"

namespace cpa {

enum class MessageKind { Assign, Response };

std::string_view to_string(MessageKind kind);

struct Message {
  MessageKind kind = MessageKind::Assign;
  std::size_t worker_index = 0;
  CMatrix payload;
  CScalar point;  // beta_n on Assign, zero on Response
  std::uint64_t tick = 0;
};

struct LatencyModel {
  enum class Kind { Zero, UniformRandom };
  Kind kind = Kind::Zero;
  std::uint64_t max_ticks = 0;  // UniformRandom draws from [0, max_ticks]

  static LatencyModel zero() { return {}; }
  static LatencyModel uniform(std::uint64_t max_ticks) { return {Kind::UniformRandom, max_ticks}; }
};

enum class ExecutionMode { Threaded, SingleThreaded };

struct SimConfig {
  LatencyModel latency;
  std::uint64_t seed = 0;
  std::size_t worker_count = 0;               // must equal N
  std::vector<std::size_t> absent_workers;    // never reply
  ExecutionMode mode = ExecutionMode::Threaded;
  DecodeMethod method = DecodeMethod::CPA;
};

struct RunTrace {
  std::vector<Message> messages;  // sorted by (tick, kind, worker_index)
  AggregateResult final;
  std::uint64_t seed = 0;
  std::size_t worker_count = 0;
};

/// Runs one master and config.worker_count workers. The master encodes with
/// encode(), each worker answers with worker_compute(), and the master decodes
/// with decode_cpa() (or decode_individual() for DecodeMethod::IndividualDecoding)
/// once it holds every response, so final matches run_pipeline() bit for bit.
///
/// Throws InvalidParams when worker_count != N or params disagree with the
/// scheme, DimensionMismatch for a dataset that does not fit, and WorkerLoss
/// when an absent worker leaves the master short of responses.
RunTrace run_simulation(const SystemParams& params, const CpaScheme& scheme, const Dataset& data,
                        const TaskSpec& task, const SimConfig& config);

struct TraceReport {
  bool valid = true;
  std::vector<std::string> violations;
};

/// Structural checks only: 2N messages, one Assign and one Response per
/// worker index, Assign strictly before Response, matching payload shapes,
/// and messages in (tick, kind, worker_index) order.
TraceReport trace_validate(const RunTrace& trace);

/// 64-bit FNV-1a over the shape and the IEEE-754 bytes of every entry, as 16
/// lowercase hex digits.
std::string payload_digest(const CMatrix& payload);

/// One JSON object per line:
/// {"kind":"Assign","worker_index":0,"tick":3,"digest":"..."}
void write_trace_jsonl(std::ostream& out, const RunTrace& trace);

}  // namespace cpa
