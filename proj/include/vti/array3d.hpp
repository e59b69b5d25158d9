#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <type_traits>

namespace vti {

inline constexpr std::size_t kAlignBytes = 64;

namespace detail {

struct FreeDeleter {
  void operator()(void* p) const noexcept { std::free(p); }
};

}  // namespace detail

// 64-byte aligned, heap-allocated storage. Memory is left untouched on
// allocation so the first write decides page placement.
template <typename T>
class AlignedBuffer {
  static_assert(std::is_trivially_copyable_v<T>);

 public:
  AlignedBuffer() = default;
  explicit AlignedBuffer(std::size_t n) : size_(n) {
    if (n == 0) return;
    std::size_t bytes = (n * sizeof(T) + kAlignBytes - 1) / kAlignBytes * kAlignBytes;
    void* p = std::aligned_alloc(kAlignBytes, bytes);
    if (!p) throw std::bad_alloc();
    ptr_.reset(static_cast<T*>(p));
  }
  AlignedBuffer(const AlignedBuffer& o) : AlignedBuffer(o.size_) {
    if (size_) std::memcpy(ptr_.get(), o.ptr_.get(), size_ * sizeof(T));
  }
  AlignedBuffer& operator=(const AlignedBuffer& o) {
    if (this != &o) *this = AlignedBuffer(o);
    return *this;
  }
  AlignedBuffer(AlignedBuffer&&) noexcept = default;
  AlignedBuffer& operator=(AlignedBuffer&&) noexcept = default;

  T* data() noexcept { return ptr_.get(); }
  const T* data() const noexcept { return ptr_.get(); }
  std::size_t size() const noexcept { return size_; }

 private:
  std::unique_ptr<T, detail::FreeDeleter> ptr_;
  std::size_t size_ = 0;
};

// Dense 3D array, x fastest. Rows may be longer than the logical x extent
// (`row_stride() >= nx()`) so every row starts on an aligned boundary.
template <typename T>
class Array3D {
 public:
  enum class Init { zero, none };

  Array3D() = default;
  Array3D(std::ptrdiff_t nx, std::ptrdiff_t ny, std::ptrdiff_t nz, std::ptrdiff_t row_stride = 0,
          Init init = Init::zero)
      : nx_(nx), ny_(ny), nz_(nz), sx_(row_stride > 0 ? row_stride : nx),
        buf_(static_cast<std::size_t>(sx_ * ny * nz)) {
    assert(sx_ >= nx_);
    if (init == Init::zero) fill(T{});
  }

  std::ptrdiff_t nx() const noexcept { return nx_; }
  std::ptrdiff_t ny() const noexcept { return ny_; }
  std::ptrdiff_t nz() const noexcept { return nz_; }
  std::ptrdiff_t row_stride() const noexcept { return sx_; }
  std::ptrdiff_t plane_stride() const noexcept { return sx_ * ny_; }
  std::size_t size() const noexcept { return buf_.size(); }

  std::ptrdiff_t index(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) const noexcept {
    return i + sx_ * (j + ny_ * k);
  }
  T& operator()(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) noexcept {
    return buf_.data()[index(i, j, k)];
  }
  const T& operator()(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) const noexcept {
    return buf_.data()[index(i, j, k)];
  }
  bool in_bounds(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) const noexcept {
    return i >= 0 && j >= 0 && k >= 0 && i < nx_ && j < ny_ && k < nz_;
  }

  T* data() noexcept { return buf_.data(); }
  const T* data() const noexcept { return buf_.data(); }
  T* row(std::ptrdiff_t j, std::ptrdiff_t k) noexcept { return data() + index(0, j, k); }
  const T* row(std::ptrdiff_t j, std::ptrdiff_t k) const noexcept { return data() + index(0, j, k); }

  void fill(T v) { std::fill_n(buf_.data(), buf_.size(), v); }

  bool same_shape(const Array3D& o) const noexcept {
    return nx_ == o.nx_ && ny_ == o.ny_ && nz_ == o.nz_ && sx_ == o.sx_;
  }

 private:
  std::ptrdiff_t nx_ = 0, ny_ = 0, nz_ = 0, sx_ = 0;
  AlignedBuffer<T> buf_;
};

}  // namespace vti
