#pragma once

#include <cstddef>

namespace faitheval::detail {

// Template resource files embedded at build time from core/templates/.
struct EmbeddedTemplate {
    const char* name;
    const unsigned char* data;
    std::size_t size;
};

extern const EmbeddedTemplate kEmbeddedTemplates[];
extern const std::size_t kEmbeddedTemplateCount;

}  // namespace faitheval::detail
