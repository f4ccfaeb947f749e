#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace pvariv {

/// Worker count for parallel sections: `requested` if positive, otherwise
/// the hardware count, in both cases capped by the PVARIV_THREADS env var.
inline int effective_threads(int requested = 0) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* cap = std::getenv("PVARIV_THREADS")) {
        const int c = std::atoi(cap);
        if (c >= 1) n = std::min(n, c);
    }
    return n;
}

}  // namespace pvariv
