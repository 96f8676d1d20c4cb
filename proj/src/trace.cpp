#include "lp/trace.hpp"

namespace lp::trace {

namespace detail {
thread_local Recorder* t_active = nullptr;
}

bool is_write(Access access) noexcept {
  switch (access) {
    case Access::WriteState:
    case Access::WriteMultiplier:
    case Access::WriteWeight:
    case Access::WriteRecurrentWeight: return true;
    default: return false;
  }
}

Scope::Scope(Recorder& recorder) : previous_(detail::t_active) { detail::t_active = &recorder; }

Scope::~Scope() { detail::t_active = previous_; }

}  // namespace lp::trace
