// UTF-8 handling for the analysis pipeline: scalar counting, a word
// tokenizer, and lowercasing. The tokenizer treats a word as a maximal run
// of letter/digit/combining-mark codepoints; supported scripts are Latin
// (including Vietnamese precomposed forms) and Arabic, which covers the
// shipped languages. Lowercasing is table-driven over the same ranges;
// codepoints outside them pass through unchanged.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace agon::text {

// Decodes the codepoint starting at byte i; advances i past it.
// Invalid sequences decode as U+FFFD and advance one byte.
inline char32_t next_codepoint(std::string_view s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        i += 1;
        return b0;
    }
    auto cont = [&](std::size_t k) { return k < s.size() && (byte(k) & 0xc0) == 0x80; };
    if ((b0 & 0xe0) == 0xc0 && cont(i + 1)) {
        char32_t cp = ((b0 & 0x1fu) << 6) | (byte(i + 1) & 0x3fu);
        i += 2;
        return cp < 0x80 ? 0xFFFD : cp;
    }
    if ((b0 & 0xf0) == 0xe0 && cont(i + 1) && cont(i + 2)) {
        char32_t cp = ((b0 & 0x0fu) << 12) | ((byte(i + 1) & 0x3fu) << 6) | (byte(i + 2) & 0x3fu);
        i += 3;
        return cp < 0x800 ? 0xFFFD : cp;
    }
    if ((b0 & 0xf8) == 0xf0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
        char32_t cp = ((b0 & 0x07u) << 18) | ((byte(i + 1) & 0x3fu) << 12) |
                      ((byte(i + 2) & 0x3fu) << 6) | (byte(i + 3) & 0x3fu);
        i += 4;
        return (cp < 0x10000 || cp > 0x10FFFF) ? 0xFFFD : cp;
    }
    i += 1;
    return 0xFFFD;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

// Number of Unicode scalar values (not bytes, not grapheme clusters).
inline std::size_t count_scalars(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size();) {
        next_codepoint(s, i);
        ++n;
    }
    return n;
}

inline bool is_word_cp(char32_t cp) {
    if (cp < 0x80)
        return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
    if (cp >= 0x00C0 && cp <= 0x00FF) return cp != 0x00D7 && cp != 0x00F7;
    if (cp >= 0x0100 && cp <= 0x024F) return true;   // Latin Extended A/B
    if (cp >= 0x0300 && cp <= 0x036F) return true;   // combining diacritics
    if (cp >= 0x0620 && cp <= 0x064A) return true;   // Arabic letters
    if (cp >= 0x064B && cp <= 0x0652) return true;   // Arabic harakat
    if (cp >= 0x0660 && cp <= 0x0669) return true;   // Arabic-Indic digits
    if (cp >= 0x0670 && cp <= 0x06D3) return true;   // Arabic letters (extended)
    if (cp == 0x06D5) return true;
    if (cp >= 0x1E00 && cp <= 0x1EFF) return true;   // Latin Extended Additional
    return false;
}

inline char32_t lower_cp(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
    if (cp >= 0x0100 && cp <= 0x012F) return (cp & 1) ? cp : cp + 1;
    if (cp == 0x0130) return 0x69; // İ -> i (dotless variants not distinguished)
    if (cp >= 0x0132 && cp <= 0x0137) return (cp & 1) ? cp : cp + 1;
    if (cp >= 0x0139 && cp <= 0x0148) return (cp & 1) ? cp + 1 : cp;
    if (cp >= 0x014A && cp <= 0x0177) return (cp & 1) ? cp : cp + 1;
    if (cp == 0x0178) return 0x00FF;
    if (cp >= 0x0179 && cp <= 0x017E) return (cp & 1) ? cp + 1 : cp;
    if (cp == 0x01A0 || cp == 0x01AF) return cp + 1;           // Ơ, Ư
    if (cp >= 0x1E00 && cp <= 0x1EFF) return (cp & 1) ? cp : cp + 1;
    return cp;
}

inline std::string lower_utf8(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        append_utf8(out, lower_cp(next_codepoint(s, i)));
    }
    return out;
}

// Lowercased word tokens in order of appearance.
inline std::vector<std::string> tokenize_words(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (std::size_t i = 0; i < s.size();) {
        char32_t cp = next_codepoint(s, i);
        if (is_word_cp(cp)) {
            append_utf8(current, lower_cp(cp));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

} // namespace agon::text
