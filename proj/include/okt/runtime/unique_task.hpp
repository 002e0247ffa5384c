#pragma once

#include <memory>
#include <type_traits>
#include <utility>

namespace okt::runtime {

// Move-only type-erased nullary callable. std::function requires copyable
// targets, which rules out lambdas owning promises or buffers.
class UniqueTask {
 public:
  UniqueTask() = default;

  template <class F, class = std::enable_if_t<!std::is_same_v<std::decay_t<F>, UniqueTask>>>
  UniqueTask(F&& f) : impl_(std::make_unique<Model<std::decay_t<F>>>(std::forward<F>(f))) {}

  UniqueTask(UniqueTask&&) noexcept = default;
  UniqueTask& operator=(UniqueTask&&) noexcept = default;
  UniqueTask(const UniqueTask&) = delete;
  UniqueTask& operator=(const UniqueTask&) = delete;

  explicit operator bool() const noexcept { return static_cast<bool>(impl_); }

  void operator()() {
    auto impl = std::move(impl_);
    impl->call();
  }

 private:
  struct Concept {
    virtual ~Concept() = default;
    virtual void call() = 0;
  };
  template <class F>
  struct Model final : Concept {
    explicit Model(F&& f) : fn(std::move(f)) {}
    explicit Model(const F& f) : fn(f) {}
    void call() override { fn(); }
    F fn;
  };
  std::unique_ptr<Concept> impl_;
};

}  // namespace okt::runtime
