#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "morseflow/errors.hpp"

namespace morseflow {

// Thread cap: MORSEFLOW_THREADS env var, else hardware concurrency.
unsigned thread_cap();

// Runs fn(i) for i in [0, n). Work is chunked over at most thread_cap()
// threads; results must be written to per-index slots so scheduling cannot
// change the output.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Rounds to 12 significant digits (report float convention).
double round12(double x);

// Overflow-checked 64-bit integer arithmetic for exact homological algebra.
inline long long checked_add(long long a, long long b) {
    long long r;
    if (__builtin_add_overflow(a, b, &r)) raise(ErrorCode::Overflow, "integer addition overflow");
    return r;
}

inline long long checked_sub(long long a, long long b) {
    long long r;
    if (__builtin_sub_overflow(a, b, &r)) raise(ErrorCode::Overflow, "integer subtraction overflow");
    return r;
}

inline long long checked_mul(long long a, long long b) {
    long long r;
    if (__builtin_mul_overflow(a, b, &r)) raise(ErrorCode::Overflow, "integer multiplication overflow");
    return r;
}

inline long long checked_neg(long long a) { return checked_sub(0, a); }

}  // namespace morseflow
