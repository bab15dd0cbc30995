#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rulemine {

// Fixed-length bit vector stored as 64-bit words. Bits past size() are kept zero
// so that word-level popcounts never need masking.
class BitVector {
public:
    using Word = std::uint64_t;
    static constexpr std::size_t kWordBits = 64;

    BitVector() = default;
    explicit BitVector(std::size_t nbits) : nbits_(nbits), words_(word_count(nbits), 0) {}

    static constexpr std::size_t word_count(std::size_t nbits) noexcept {
        return (nbits + kWordBits - 1) / kWordBits;
    }

    std::size_t size() const noexcept { return nbits_; }
    std::span<const Word> words() const noexcept { return words_; }

    bool test(std::size_t i) const {
        check(i);
        return (words_[i / kWordBits] >> (i % kWordBits)) & 1u;
    }

    void set(std::size_t i, bool value = true) {
        check(i);
        const Word mask = Word{1} << (i % kWordBits);
        if (value)
            words_[i / kWordBits] |= mask;
        else
            words_[i / kWordBits] &= ~mask;
    }

    std::size_t count() const noexcept {
        std::size_t n = 0;
        for (Word w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    bool none() const noexcept {
        for (Word w : words_)
            if (w) return false;
        return true;
    }

    BitVector& operator&=(const BitVector& other) {
        same_size(other);
        for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= other.words_[k];
        return *this;
    }

    BitVector& operator|=(const BitVector& other) {
        same_size(other);
        for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= other.words_[k];
        return *this;
    }

    friend BitVector operator&(BitVector lhs, const BitVector& rhs) {
        lhs &= rhs;
        return lhs;
    }

    friend bool operator==(const BitVector&, const BitVector&) = default;

    // popcount(a & b) without materialising the intersection.
    static std::size_t and_count(const BitVector& a, const BitVector& b) {
        a.same_size(b);
        std::size_t n = 0;
        for (std::size_t k = 0; k < a.words_.size(); ++k)
            n += static_cast<std::size_t>(std::popcount(a.words_[k] & b.words_[k]));
        return n;
    }

    // Writes a & b into out (resized as needed) and returns its popcount.
    static std::size_t and_into(const BitVector& a, const BitVector& b, BitVector& out) {
        a.same_size(b);
        out.nbits_ = a.nbits_;
        out.words_.resize(a.words_.size());
        std::size_t n = 0;
        for (std::size_t k = 0; k < a.words_.size(); ++k) {
            out.words_[k] = a.words_[k] & b.words_[k];
            n += static_cast<std::size_t>(std::popcount(out.words_[k]));
        }
        return n;
    }

    static BitVector all_set(std::size_t nbits) {
        BitVector v(nbits);
        for (auto& w : v.words_) w = ~Word{0};
        if (nbits % kWordBits && !v.words_.empty())
            v.words_.back() = (Word{1} << (nbits % kWordBits)) - 1;
        return v;
    }

private:
    void check(std::size_t i) const {
        if (i >= nbits_) throw std::out_of_range("bit index out of range");
    }
    void same_size(const BitVector& other) const {
        if (other.nbits_ != nbits_) throw std::invalid_argument("bit vector length mismatch");
    }

    std::size_t nbits_ = 0;
    std::vector<Word> words_;
};

}  // namespace rulemine
