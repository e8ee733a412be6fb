#pragma once

#include <atomic>
#include <condition_variable>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mqc/circuit.hpp"
#include "mqc/errors.hpp"
#include "mqc/io.hpp"
#include "mqc/observables.hpp"

namespace mqc {

struct EnsembleOptions {
  long n_realizations = 0;
  int n_threads = 1;
  bool store_records = true;
  bool time_resolved = false;  // evaluate after every layer instead of only at the end
};

struct RealizationPayload {
  CircuitRecord record;
  std::vector<ValueRow> rows;
};

// Streams realizations to values.jsonl / records.jsonl in realization order,
// whatever order the workers finish in; reruns are byte-identical.
class DatasetWriter {
 public:
  DatasetWriter(const std::filesystem::path& dir, const CircuitConfig& cfg, bool store_records)
      : dir_(dir), store_records_(store_records) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw io_error("cannot create output directory " + dir_.string());
    {
      std::ofstream cfg_out(dir_ / "config.json", std::ios::trunc);
      if (!cfg_out) throw io_error("cannot write config.json in " + dir_.string());
      cfg_out << config_to_json(cfg).dump(2) << "\n";
    }
    values_.open(dir_ / "values.jsonl", std::ios::trunc);
    if (!values_) throw io_error("cannot write values.jsonl in " + dir_.string());
    if (store_records_) {
      records_.open(dir_ / "records.jsonl", std::ios::trunc);
      if (!records_) throw io_error("cannot write records.jsonl in " + dir_.string());
    }
  }

  const std::filesystem::path& dir() const { return dir_; }
  bool store_records() const { return store_records_; }

  void write(const RealizationPayload& payload) {
    for (const ValueRow& row : payload.rows) {
      values_ << value_row_to_json(row).dump() << "\n";
    }
    if (store_records_) records_ << record_to_json(payload.record).dump() << "\n";
    if (!values_ || (store_records_ && !records_)) {
      throw io_error("write failed in " + dir_.string());
    }
  }

  void close() {
    values_.close();
    if (store_records_) records_.close();
  }

  std::vector<std::string> output_files() const {
    std::vector<std::string> out{"config.json", "values.jsonl"};
    if (store_records_) out.push_back("records.jsonl");
    return out;
  }

 private:
  std::filesystem::path dir_;
  bool store_records_;
  std::ofstream values_;
  std::ofstream records_;
};

// Runs n seeded realizations, evaluates the requests on each final state (or
// on every layer when time_resolved), and hands payloads to `sink` in
// realization order. Worker count never changes any byte of the output.
inline void run_ensemble(const CircuitConfig& cfg, const std::vector<ObservableRequest>& requests,
                         const EnsembleOptions& options,
                         const std::function<void(long, const RealizationPayload&)>& sink) {
  cfg.validate();
  if (options.n_realizations < 0) throw config_error("n_realizations must be non-negative");
  const long n = options.n_realizations;
  if (n == 0) return;

  const int n_threads = std::max(1, options.n_threads);

  std::atomic<long> next{0};
  std::mutex mu;
  std::map<long, RealizationPayload> finished;
  long next_emit = 0;
  std::exception_ptr failure;

  auto compute = [&](long k) {
    RealizationPayload payload;
    if (options.time_resolved) {
      RealizationResult res =
          run_realization(cfg, k, [&](const LayerInfo& info, const StateVector& psi) {
            std::vector<ValueRow> rows = evaluate_requests(psi, cfg, k, requests, info.layer);
            payload.rows.insert(payload.rows.end(), rows.begin(), rows.end());
          });
      payload.record = std::move(res.record);
      std::vector<ValueRow> rows = evaluate_requests(res.state, cfg, k, requests);
      payload.rows.insert(payload.rows.end(), rows.begin(), rows.end());
    } else {
      RealizationResult res = run_realization(cfg, k);
      payload.record = std::move(res.record);
      payload.rows = evaluate_requests(res.state, cfg, k, requests);
    }
    return payload;
  };

  auto worker = [&] {
    for (;;) {
      const long k = next.fetch_add(1);
      if (k >= n) return;
      RealizationPayload payload;
      try {
        payload = compute(k);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
      std::lock_guard lock(mu);
      if (failure) return;
      finished.emplace(k, std::move(payload));
      while (!finished.empty() && finished.begin()->first == next_emit) {
        try {
          sink(next_emit, finished.begin()->second);
        } catch (...) {
          if (!failure) failure = std::current_exception();
          next.store(n);
          return;
        }
        finished.erase(finished.begin());
        ++next_emit;
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mqc
