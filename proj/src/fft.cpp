// SPDX-License-Identifier: Apache-2.0

#include "mwc/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace mwc::fft {
namespace {

// FFTW's planner is not reentrant; execution of an existing plan is. Plans are
// made with FFTW_UNALIGNED so they can be reused on arbitrary vector storage.
class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, int sign)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<Complex> a(n), b(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(a.data()),
                                          reinterpret_cast<fftw_complex*>(b.data()), sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache c;
    return c;
}

std::vector<Complex> run(std::span<const Complex> in, int sign)
{
    std::vector<Complex> out(in.size());
    if (in.empty()) return out;
    std::vector<Complex> buf(in.begin(), in.end());
    fftw_execute_dft(cache().get(in.size(), sign), reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

}  // namespace

std::vector<Complex> forward(std::span<const Complex> x) { return run(x, FFTW_FORWARD); }

std::vector<Complex> forward(std::span<const double> x)
{
    std::vector<Complex> c(x.begin(), x.end());
    return run(c, FFTW_FORWARD);
}

std::vector<Complex> inverse(std::span<const Complex> X) { return run(X, FFTW_BACKWARD); }

}  // namespace mwc::fft
