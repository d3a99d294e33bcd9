#ifndef V2XNOISE_ERRORS_HPP
#define V2XNOISE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace v2xnoise {

/// Coordinate-frame bookkeeping violation (composing or applying a
/// transform whose frames do not line up).
class FrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested operation is undefined at this orientation (gimbal lock,
/// pi-rotation in the SE(3) logarithm).
class DegenerateOrientationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed on-disk input. Carries the byte offset where parsing stopped
/// when it is known (npos otherwise).
class ParseError : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ParseError(const std::string& what, std::size_t byte_offset = npos)
      : std::runtime_error(byte_offset == npos
                               ? what
                               : what + " (byte offset " +
                                     std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

/// No points survived projection under both transforms; the misalignment
/// statistic is undefined.
class EmptyOverlapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace v2xnoise

#endif  // V2XNOISE_ERRORS_HPP
