#include "cpa/simulator.hpp"

#include <algorithm>
#include <bit>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "cpa/error.hpp"
#include "cpa/random.hpp"

namespace cpa {

namespace {

template <typename T>
class Mailbox {
 public:
  void push(T item) {
    {
      std::lock_guard lock(mu_);
      items_.push_back(std::move(item));
    }
    cv_.notify_one();
  }

  T pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return !items_.empty(); });
    T item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
};

struct Latencies {
  std::uint64_t assign = 0;
  std::uint64_t response = 0;
};

Latencies draw_latencies(const SimConfig& config, std::size_t worker) {
  if (config.latency.kind == LatencyModel::Kind::Zero) return {};
  const std::uint64_t span = config.latency.max_ticks + 1;
  Rng rng(sub_seed(config.seed, {static_cast<std::uint64_t>(worker)}));
  Latencies out;
  out.assign = rng() % span;
  out.response = rng() % span;
  return out;
}

// A worker handles exactly one Assign. Absent workers receive theirs and drop
// it, which is all the master can observe of a lost node.
void worker_step(Mailbox<Message>& inbox, Mailbox<Message>& master, const TaskSpec& task, Latencies latency,
                 bool absent) {
  Message assign = inbox.pop();
  if (absent) return;
  const EncodedShare share{assign.worker_index, assign.point, std::move(assign.payload)};
  WorkerResponse response = worker_compute(share, task);
  master.push(Message{MessageKind::Response, response.worker_index, std::move(response.payload), CScalar{0.0},
                      assign.tick + 1 + latency.response});
}

bool message_order(const Message& a, const Message& b) {
  return std::tuple(a.tick, static_cast<int>(a.kind), a.worker_index) <
         std::tuple(b.tick, static_cast<int>(b.kind), b.worker_index);
}

}  // namespace

std::string_view to_string(MessageKind kind) {
  return kind == MessageKind::Assign ? "Assign" : "Response";
}

RunTrace run_simulation(const SystemParams& params, const CpaScheme& scheme, const Dataset& data,
                        const TaskSpec& task, const SimConfig& config) {
  const std::size_t n_workers = scheme.beta.size();
  if (params.K != scheme.params.K || params.d != scheme.params.d || params.N != scheme.params.N ||
      params.alpha != scheme.params.alpha || params.w != scheme.params.w) {
    throw Error(ErrorCode::InvalidParams, "simulation params differ from the scheme's");
  }
  if (config.worker_count != n_workers || n_workers != static_cast<std::size_t>(params.N)) {
    throw Error(ErrorCode::InvalidParams, "worker_count must equal N = " + std::to_string(params.N));
  }
  std::set<std::size_t> absent;
  for (std::size_t w : config.absent_workers) {
    if (w >= n_workers) throw Error(ErrorCode::InvalidParams, "absent worker index out of range");
    absent.insert(w);
  }

  const std::vector<EncodedShare> shares = encode(data, scheme);

  std::vector<Latencies> latency(n_workers);
  for (std::size_t n = 0; n < n_workers; ++n) latency[n] = draw_latencies(config, n);

  std::vector<Mailbox<Message>> inboxes(n_workers);
  Mailbox<Message> master;
  RunTrace trace;
  trace.seed = config.seed;
  trace.worker_count = n_workers;

  for (const EncodedShare& share : shares) {
    Message assign{MessageKind::Assign, share.worker_index, share.payload, share.point, latency[share.worker_index].assign};
    trace.messages.push_back(assign);
    inboxes[share.worker_index].push(std::move(assign));
  }
  spdlog::debug("master dispatched {} assignments", shares.size());

  if (config.mode == ExecutionMode::Threaded) {
    std::vector<std::jthread> workers;
    workers.reserve(n_workers);
    for (std::size_t n = 0; n < n_workers; ++n) {
      workers.emplace_back([&, n] { worker_step(inboxes[n], master, task, latency[n], absent.contains(n)); });
    }
  } else {
    for (std::size_t n = 0; n < n_workers; ++n) worker_step(inboxes[n], master, task, latency[n], absent.contains(n));
  }

  // Every live worker has replied by now (the jthreads joined above), so the
  // master drains exactly that many messages.
  std::vector<WorkerResponse> responses;
  for (std::size_t i = 0; i < n_workers - absent.size(); ++i) {
    Message m = master.pop();
    spdlog::debug("master received response from worker {} at tick {}", m.worker_index, m.tick);
    responses.push_back(WorkerResponse{m.worker_index, m.payload});
    trace.messages.push_back(std::move(m));
  }

  try {
    if (config.method == DecodeMethod::CPA) {
      trace.final = decode_cpa(std::move(responses), scheme);
    } else {
      trace.final = decode_individual(std::move(responses), scheme.beta, params).aggregate;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MissingResponses || absent.empty()) throw;
    throw Error(ErrorCode::WorkerLoss, std::string("decode failed after losing workers: ") + e.what());
  }

  std::sort(trace.messages.begin(), trace.messages.end(), message_order);
  return trace;
}

TraceReport trace_validate(const RunTrace& trace) {
  TraceReport report;
  const auto fail = [&](std::string why) {
    report.valid = false;
    report.violations.push_back(std::move(why));
  };

  const std::size_t n = trace.worker_count;
  if (trace.messages.size() != 2 * n) {
    fail("message count: expected " + std::to_string(2 * n) + ", found " + std::to_string(trace.messages.size()));
  }

  std::vector<int> assigns(n, 0);
  std::vector<int> replies(n, 0);
  std::vector<std::uint64_t> assign_tick(n, 0);
  const CMatrix* shape = nullptr;
  for (std::size_t i = 0; i < trace.messages.size(); ++i) {
    const Message& m = trace.messages[i];
    if (i > 0 && message_order(m, trace.messages[i - 1])) fail("order: message " + std::to_string(i) + " out of order");
    if (m.worker_index >= n) {
      fail("worker index " + std::to_string(m.worker_index) + " out of range");
      continue;
    }
    if (shape == nullptr) {
      shape = &m.payload;
    } else if (!m.payload.same_shape(*shape)) {
      fail("payload shape differs at message " + std::to_string(i));
    }
    if (m.kind == MessageKind::Assign) {
      if (++assigns[m.worker_index] > 1) fail("duplicate index: second Assign for worker " + std::to_string(m.worker_index));
      assign_tick[m.worker_index] = m.tick;
    } else {
      if (++replies[m.worker_index] > 1) {
        fail("duplicate index: second Response from worker " + std::to_string(m.worker_index));
      }
      if (assigns[m.worker_index] == 0 || m.tick <= assign_tick[m.worker_index]) {
        fail("causality: Response from worker " + std::to_string(m.worker_index) + " precedes its Assign");
      }
    }
  }
  for (std::size_t w = 0; w < n; ++w) {
    if (assigns[w] == 0) fail("missing Assign for worker " + std::to_string(w));
    if (replies[w] == 0) fail("missing Response from worker " + std::to_string(w));
  }
  if (shape != nullptr && !trace.final.Y_hat.same_shape(*shape)) {
    fail("final result shape differs from payloads");
  }
  return report;
}

std::string payload_digest(const CMatrix& payload) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(payload.rows());
  mix(payload.cols());
  for (CScalar x : payload.data()) {
    mix(std::bit_cast<std::uint64_t>(x.real()));
    mix(std::bit_cast<std::uint64_t>(x.imag()));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_trace_jsonl(std::ostream& out, const RunTrace& trace) {
  for (const Message& m : trace.messages) {
    nlohmann::ordered_json line;
    line["kind"] = to_string(m.kind);
    line["worker_index"] = m.worker_index;
    line["tick"] = m.tick;
    line["digest"] = payload_digest(m.payload);
    out << line.dump() << '\n';
  }
}

}  // namespace cpa
