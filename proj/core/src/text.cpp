#include "faitheval/text.hpp"

#include <algorithm>
#include <cctype>

namespace faitheval {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::size_t word_count(std::string_view text) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : text) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.' || c == '!' || c == '?') {
            // consume a run of closing punctuation, e.g. `?!` or `..."`
            std::size_t end = i + 1;
            while (end < text.size() &&
                   (text[end] == '.' || text[end] == '!' || text[end] == '?' ||
                    text[end] == '"' || text[end] == '\'')) {
                ++end;
            }
            if (end >= text.size() || is_space(text[end])) {
                auto piece = trim(text.substr(start, end - start));
                if (!piece.empty()) sentences.emplace_back(piece);
                start = end;
                i = end - 1;
            }
        }
    }
    if (start < text.size()) {
        auto piece = trim(text.substr(start));
        if (!piece.empty()) sentences.emplace_back(piece);
    }
    return sentences;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        start = nl + 1;
    }
    return lines;
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

std::string_view trim(std::string_view text) {
    while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
    while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
    return text;
}

std::string replace_placeholder(std::string tmpl, std::string_view key,
                                std::string_view value) {
    std::string needle = "{{";
    needle += key;
    needle += "}}";
    std::size_t pos = 0;
    while ((pos = tmpl.find(needle, pos)) != std::string::npos) {
        tmpl.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return tmpl;
}

}  // namespace faitheval
