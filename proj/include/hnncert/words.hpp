#pragma once

// Exact arithmetic in the free group F_n.
//
// A letter is a nonzero integer: i > 0 stands for the generator a_i and -i for
// its inverse. At the I/O boundary the letters a..z (uppercase = inverse) are
// accepted for rank <= 26.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hnncert/errors.hpp"

namespace hnncert {

using Letter = int;

class Word {
 public:
  Word() = default;
  explicit Word(int rank) : rank_(rank) {}

  // Freely reduces `raw`; throws InputError on out-of-range letters.
  static Word reduced(std::span<Letter const> raw, int rank) {
    Word w(rank);
    w.letters_.reserve(raw.size());
    for (Letter x : raw) {
      if (x == 0 || x > rank || x < -rank) {
        throw InputError("letter " + std::to_string(x)
                         + " out of range for rank " + std::to_string(rank));
      }
      if (!w.letters_.empty() && w.letters_.back() == -x) {
        w.letters_.pop_back();
      } else {
        w.letters_.push_back(x);
      }
    }
    return w;
  }

  static Word reduced(std::initializer_list<Letter> raw, int rank) {
    return reduced(std::span<Letter const>(raw.begin(), raw.size()), rank);
  }

  int rank() const noexcept { return rank_; }
  std::vector<Letter> const& letters() const noexcept { return letters_; }
  std::size_t size() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }
  Letter front() const { return letters_.front(); }
  Letter back() const { return letters_.back(); }

  Word inverse() const {
    Word w(rank_);
    w.letters_.reserve(letters_.size());
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) {
      w.letters_.push_back(-*it);
    }
    return w;
  }

  // Product in F_n; cancellation only happens at the junction.
  friend Word operator*(Word const& u, Word const& v) {
    if (u.rank_ != v.rank_) {
      throw InputError("rank mismatch in word product");
    }
    std::size_t cancel = 0;
    while (cancel < u.size() && cancel < v.size()
           && u.letters_[u.size() - 1 - cancel] == -v.letters_[cancel]) {
      ++cancel;
    }
    Word w(u.rank_);
    w.letters_.reserve(u.size() + v.size() - 2 * cancel);
    w.letters_.insert(w.letters_.end(), u.letters_.begin(),
                      u.letters_.end() - static_cast<std::ptrdiff_t>(cancel));
    w.letters_.insert(w.letters_.end(),
                      v.letters_.begin() + static_cast<std::ptrdiff_t>(cancel),
                      v.letters_.end());
    return w;
  }

  Word& operator*=(Word const& v) { return *this = *this * v; }

  Word power(int k) const {
    Word base = k < 0 ? inverse() : *this;
    Word result(rank_);
    for (int i = 0; i < (k < 0 ? -k : k); ++i) {
      result *= base;
    }
    return result;
  }

  friend bool operator==(Word const&, Word const&) = default;
  friend auto operator<=>(Word const& u, Word const& v) {
    return u.letters_ <=> v.letters_;
  }

 private:
  int                 rank_ = 0;
  std::vector<Letter> letters_;
};

inline Word reduce(std::span<Letter const> raw, int rank) {
  return Word::reduced(raw, rank);
}

struct CyclicDecomposition {
  Word core;
  Word conjugator;
};

// w == conjugator * core * conjugator^{-1}, core cyclically reduced.
inline CyclicDecomposition cyclic_reduce(Word const& w) {
  auto const&  x = w.letters();
  std::size_t  i = 0;
  std::size_t  j = x.size();
  while (j - i >= 2 && x[i] == -x[j - 1]) {
    ++i;
    --j;
  }
  std::vector<Letter> core(x.begin() + static_cast<std::ptrdiff_t>(i),
                           x.begin() + static_cast<std::ptrdiff_t>(j));
  std::vector<Letter> conj(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(i));
  return {Word::reduced(core, w.rank()), Word::reduced(conj, w.rank())};
}

inline std::size_t cyclic_length(Word const& w) {
  return cyclic_reduce(w).core.size();
}

// Index of the lexicographically least rotation (Booth's algorithm).
template <typename T>
std::size_t least_rotation(std::vector<T> const& s) {
  std::size_t const n = s.size();
  if (n == 0) {
    return 0;
  }
  std::vector<std::ptrdiff_t> fail(2 * n, -1);
  std::size_t                 k = 0;
  for (std::size_t j = 1; j < 2 * n; ++j) {
    T const        sj = s[j % n];
    std::ptrdiff_t i  = fail[j - k - 1];
    while (i != -1 && sj != s[(k + static_cast<std::size_t>(i) + 1) % n]) {
      if (sj < s[(k + static_cast<std::size_t>(i) + 1) % n]) {
        k = j - static_cast<std::size_t>(i) - 1;
      }
      i = fail[static_cast<std::size_t>(i)];
    }
    if (i == -1 && sj != s[(k + static_cast<std::size_t>(i) + 1) % n]) {
      if (sj < s[(k + static_cast<std::size_t>(i) + 1) % n]) {
        k = j;
      }
      fail[j - k] = -1;
    } else {
      fail[j - k] = i + 1;
    }
  }
  return k % n;
}

template <typename T>
std::vector<T> rotate_to_least(std::vector<T> s) {
  std::size_t k = least_rotation(s);
  std::rotate(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k), s.end());
  return s;
}

// Canonical representative of the conjugacy class of w: the least rotation of
// its cyclically reduced core.
inline std::vector<Letter> conjugacy_canonical(Word const& w) {
  return rotate_to_least(cyclic_reduce(w).core.letters());
}

inline bool conjugate_in_free_group(Word const& w1, Word const& w2) {
  return conjugacy_canonical(w1) == conjugacy_canonical(w2);
}

// Shortest u with cyclic core of w a rotation of u^k; returns {u, k}.
template <typename T>
std::pair<std::vector<T>, int> primitive_root(std::vector<T> const& cyclic) {
  std::size_t const n = cyclic.size();
  for (std::size_t p = 1; p <= n; ++p) {
    if (n % p != 0) {
      continue;
    }
    bool ok = true;
    for (std::size_t i = p; i < n && ok; ++i) {
      ok = cyclic[i] == cyclic[i - p];
    }
    if (ok) {
      return {std::vector<T>(cyclic.begin(),
                             cyclic.begin() + static_cast<std::ptrdiff_t>(p)),
              static_cast<int>(n / p)};
    }
  }
  return {cyclic, 1};
}

class Endomorphism {
 public:
  Endomorphism() = default;

  Endomorphism(int rank, std::vector<Word> images)
      : rank_(rank), images_(std::move(images)) {
    if (static_cast<int>(images_.size()) != rank_) {
      throw InputError("endomorphism needs one image per generator");
    }
    for (auto const& w : images_) {
      if (w.rank() != rank_) {
        throw InputError("image rank mismatch");
      }
      if (w.empty()) {
        throw InputError("generator images must be nonempty");
      }
    }
  }

  static Endomorphism identity(int rank) {
    std::vector<Word> images;
    for (int i = 1; i <= rank; ++i) {
      images.push_back(Word::reduced({i}, rank));
    }
    return Endomorphism(rank, std::move(images));
  }

  int                      rank() const noexcept { return rank_; }
  std::vector<Word> const& images() const noexcept { return images_; }
  Word const& image(int generator) const { return images_.at(generator - 1); }

  std::size_t max_image_length() const {
    std::size_t m = 0;
    for (auto const& w : images_) {
      m = std::max(m, w.size());
    }
    return m;
  }

  Word operator()(Word const& w) const {
    if (w.rank() != rank_) {
      throw InputError("rank mismatch applying endomorphism");
    }
    std::vector<Letter> raw;
    for (Letter x : w.letters()) {
      auto const& img = images_[static_cast<std::size_t>(std::abs(x) - 1)];
      if (x > 0) {
        raw.insert(raw.end(), img.letters().begin(), img.letters().end());
      } else {
        for (auto it = img.letters().rbegin(); it != img.letters().rend(); ++it) {
          raw.push_back(-*it);
        }
      }
    }
    return Word::reduced(raw, rank_);
  }

  // (this ∘ other)(w) = this(other(w)).
  Endomorphism compose(Endomorphism const& other) const {
    std::vector<Word> images;
    for (auto const& w : other.images_) {
      images.push_back((*this)(w));
    }
    for (auto const& w : images) {
      if (w.empty()) {
        throw InputError("composition kills a generator");
      }
    }
    return Endomorphism(rank_, std::move(images));
  }

  Endomorphism power(int k) const {
    if (k < 0) {
      throw InputError("negative endomorphism power");
    }
    Endomorphism result = identity(rank_);
    for (int i = 0; i < k; ++i) {
      result = compose(result);
    }
    return result;
  }

  friend bool operator==(Endomorphism const&, Endomorphism const&) = default;

 private:
  int               rank_ = 0;
  std::vector<Word> images_;
};

inline Word apply_endo(Endomorphism const& e, Word const& w) {
  return e(w);
}

// Letter syntax: a..z, uppercase = inverse. Whitespace and '.' are ignored.
inline Word parse_word(std::string_view text, int rank) {
  std::vector<Letter> raw;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == ' ' || c == '.' || c == '\t') {
      continue;
    }
    if (c >= 'a' && c <= 'z') {
      raw.push_back(c - 'a' + 1);
    } else if (c >= 'A' && c <= 'Z') {
      raw.push_back(-(c - 'A' + 1));
    } else {
      throw InputError("unexpected character '" + std::string(1, c)
                       + "' at offset " + std::to_string(i) + " in word \""
                       + std::string(text) + "\"");
    }
  }
  return Word::reduced(raw, rank);
}

inline std::string to_string(Word const& w) {
  if (w.rank() > 26) {
    std::string s = "[";
    for (std::size_t i = 0; i < w.size(); ++i) {
      s += (i ? "," : "") + std::to_string(w[i]);
    }
    return s + "]";
  }
  std::string s;
  for (Letter x : w.letters()) {
    s += x > 0 ? static_cast<char>('a' + x - 1) : static_cast<char>('A' - x - 1);
  }
  return s;
}

}  // namespace hnncert
