#include "lab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>
#include <vector>

namespace lab::fft {
namespace {

using Key = std::tuple<std::size_t, std::size_t, int>;

struct PlanCache {
    std::shared_mutex mu;
    std::map<Key, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [k, p] : plans) fftw_destroy_plan(p);
    }

    fftw_plan get(std::size_t rows, std::size_t cols, int sign) {
        Key key{rows, cols, sign};
        {
            std::shared_lock lk(mu);
            auto it = plans.find(key);
            if (it != plans.end()) return it->second;
        }
        std::unique_lock lk(mu);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        // FFTW planning is not thread safe; the unique lock serializes it.
        std::vector<cplx> scratch(rows * cols);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan p = rows == 1
            ? fftw_plan_dft_1d(static_cast<int>(cols), buf, buf, sign, flags)
            : fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf, sign, flags);
        plans.emplace(key, p);
        return p;
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

} // namespace

void transform(cplx* data, std::size_t n, int sign) {
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(cache().get(1, n, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD), buf, buf);
}

void transform2d(cplx* data, std::size_t rows, std::size_t cols, int sign) {
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(cache().get(rows, cols, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD), buf, buf);
}

} // namespace lab::fft
