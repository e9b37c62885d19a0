#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "batchq/ct_limit.hpp"
#include "batchq/model.hpp"

namespace batchq {

/// Parsed model specification file. Stability is not checked here; that
/// happens when a model is built from it.
///
/// Grammar (one `key = value` per line, `#` starts a comment):
///
///     [arrival]     time = discrete | continuous          (default discrete)
///                   discrete:   kind = finite        pmf = 7:0.5, 10:0.2, 15:0.3
///                               kind = geometric     p = 0.2
///                               kind = deterministic slots = 10
///                   continuous: kind = exponential   rate = 0.2
///                               kind = deterministic duration = 10
///                               kind = erlang        stages = 3, rate = 0.6
///     [batch]       pmf = 1:0.4, 2:0.3, 3:0.3
///     [service]     mu = 0.5       (per-slot probability, or rate if continuous)
///     [capacity]    kind = finite    pmf = 1:0.4, 2:0.6
///                   kind = geometric p = 0.4
///     [output]      n_max = 40                              (optional)
///     [simulation]  slots, seed, warmup, histogram_cap      (optional)
struct ModelSpec {
    std::variant<InterArrivalDist, CtInterArrival> arrival;
    FinitePmf batch;
    double mu;
    CapacityDist capacity;

    std::optional<int> n_max;
    std::optional<std::uint64_t> slots;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> warmup;
    std::optional<int> histogram_cap;

    bool is_continuous() const noexcept { return std::holds_alternative<CtInterArrival>(arrival); }

    /// Throws Error{Parse} if the arrival section is continuous, plus the
    /// errors of build_model.
    QueueModel discrete_model() const;
    /// Throws Error{Parse} if the arrival section is discrete, plus the
    /// errors of build_ct_model.
    CtModel ct_model() const;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Throws Error{Parse}; messages are prefixed with origin:line and name the
/// offending section and key.
ModelSpec parse_spec(std::string_view text, std::string_view origin = "<spec>");

/// Throws Error{Parse} when the file cannot be read.
ModelSpec load_spec(const std::string& path);

/// Canonical text form; parse_spec(echo_spec(s)) == s.
std::string echo_spec(const ModelSpec& spec);

}  // namespace batchq
