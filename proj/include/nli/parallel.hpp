#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

namespace nli {

/// Worker count used by the parallel loops; 0 selects hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(chunk) for chunk in [0, chunks) across the worker pool. Work is
/// split by chunk index only, so results merged in chunk order are
/// independent of the thread count.
void parallel_for(std::size_t chunks, const std::function<void(std::size_t)>& body);

/// Compensated (Neumaier) running sum.
class Accumulator {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            compensation_ += (sum_ - t) + x;
        else
            compensation_ += (x - t) + sum_;
        sum_ = t;
    }
    void add(const Accumulator& other) {
        add(other.sum_);
        add(other.compensation_);
    }
    double value() const { return sum_ + compensation_; }

  private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

}  // namespace nli
