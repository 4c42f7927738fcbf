// Reference implementation of the external-detector subprocess protocol:
// reads {"context": ..., "response": ...} JSON records line by line on
// stdin and answers {"score": s} per line on stdout, where the score is a
// consistency score in [0, 1].
//
// The stub scores 0.0 when the response contains the marker token
// "HALLUC", 1.0 when the response is a substring of the context, and 0.75
// otherwise. Useful for tests and as a template for wrapping a real
// detector.

#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

int main() {
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "bad input line: " << e.what() << "\n";
            return 1;
        }
        const std::string context = record.value("context", std::string());
        const std::string response = record.value("response", std::string());
        double score = 0.75;
        if (response.find("HALLUC") != std::string::npos)
            score = 0.0;
        else if (!response.empty() &&
                 context.find(response) != std::string::npos)
            score = 1.0;
        std::cout << nlohmann::json{{"score", score}}.dump() << "\n";
    }
    return 0;
}
