#pragma once

// Memory-access tracing for locality checks.
//
// State, multiplier and weight accessors report every touch to the recorder
// installed on the calling thread, if any. Without an active Scope the hook
// costs one thread-local load.

#include <cstddef>
#include <vector>

namespace lp::trace {

enum class Access {
  ReadState,
  ReadMultiplier,
  ReadInput,
  ReadTarget,
  ReadWeight,
  ReadRecurrentWeight,
  ReadNodeTerm,
  WriteState,
  WriteMultiplier,
  WriteWeight,
  WriteRecurrentWeight,
};

bool is_write(Access access) noexcept;

struct Event {
  Access access;
  std::size_t example;  // 0 for weights
  int layer;
  int time;  // 0 outside recurrent graphs
};

struct Recorder {
  std::vector<Event> events;
  void clear() { events.clear(); }
};

/// Installs `recorder` on the current thread for the lifetime of the scope.
class Scope {
 public:
  explicit Scope(Recorder& recorder);
  ~Scope();
  Scope(const Scope&) = delete;
  Scope& operator=(const Scope&) = delete;

 private:
  Recorder* previous_;
};

namespace detail {
extern thread_local Recorder* t_active;
}

inline void record(Access access, std::size_t example, int layer, int time) {
  if (detail::t_active != nullptr) detail::t_active->events.push_back({access, example, layer, time});
}

}  // namespace lp::trace
