#ifndef MIC_TEMPLATES_HPP
#define MIC_TEMPLATES_HPP

#include <array>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mic/core.hpp"
#include "mic/errors.hpp"

namespace mic {

inline const std::array<std::string_view, 8>& allowed_placeholders() {
    static const std::array<std::string_view, 8> names = {
        "image", "question", "answer", "options", "quadrant", "prompt", "caption0", "caption1"};
    return names;
}

struct placeholder_ref {
    std::string name;
    std::size_t begin = 0;  // offset of '{'
    std::size_t end = 0;    // one past '}'
};

/// Splits a template into its placeholder occurrences. Throws parse_error on
/// unbalanced braces; unknown names are returned and rejected by validation.
inline std::vector<placeholder_ref> scan_placeholders(std::string_view tmpl) {
    std::vector<placeholder_ref> out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '}') throw parse_error(i, "unmatched '}' in template");
        if (tmpl[i] != '{') continue;
        const std::size_t close = tmpl.find('}', i + 1);
        if (close == std::string_view::npos) throw parse_error(i, "unterminated '{' in template");
        const std::string_view inner = tmpl.substr(i + 1, close - i - 1);
        if (inner.find('{') != std::string_view::npos)
            throw parse_error(i, "nested '{' in template");
        out.push_back({std::string(inner), i, close + 1});
        i = close;
    }
    return out;
}

inline std::size_t count_image_marks(std::string_view tmpl) {
    std::size_t n = 0;
    for (const auto& p : scan_placeholders(tmpl))
        if (p.name == "image") ++n;
    return n;
}

/// A template is well-formed when its placeholders come from the allowed set,
/// braces balance, and every {image} it uses is backed by a declaration
/// pattern "image <k> is [IMG<k>]" or "image <k>: [IMG<k>]" for that k.
inline std::vector<violation> validate_template(const std::string& tmpl) {
    std::vector<violation> out;
    std::vector<placeholder_ref> refs;
    try {
        refs = scan_placeholders(tmpl);
    } catch (const parse_error& e) {
        out.push_back({"template", e.what()});
        return out;
    }
    std::size_t images = 0;
    for (const auto& r : refs) {
        bool known = false;
        for (auto n : allowed_placeholders()) known = known || n == r.name;
        if (!known) out.push_back({"template", "unknown placeholder '{" + r.name + "}'"});
        if (r.name == "image") ++images;
    }
    for (std::size_t k = 0; k < images; ++k) {
        if (text::count_declarations(tmpl, static_cast<std::uint32_t>(k)) == 0)
            out.push_back({"template", "no declaration pattern for image " + std::to_string(k)});
    }
    return out;
}

inline std::vector<violation> validate(const template_bank& bank) {
    std::vector<violation> out;
    if (bank.task.empty()) out.push_back({"bank.task", "must be nonempty"});
    if (bank.templates.empty()) out.push_back({"bank", "needs at least one template"});
    for (std::size_t i = 0; i < bank.templates.size(); ++i)
        for (auto& v : validate_template(bank.templates[i]))
            out.push_back({"bank[" + bank.task + "][" + std::to_string(i) + "]", v.message});
    return out;
}

using bank_set = std::map<std::string, template_bank>;

/// Loads banks from a JSON file shaped {"task": ["template", ...], ...}.
inline bank_set load_banks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io, "cannot open template file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(e.byte, std::string("template file: ") + e.what());
    }
    if (!j.is_object()) throw error(errc::manifest, "template file must map task -> [templates]");
    bank_set banks;
    for (const auto& [task, arr] : j.items()) {
        if (!arr.is_array() || arr.empty())
            throw error(errc::manifest, "task '" + task + "' must carry a nonempty template array");
        template_bank bank{task, {}};
        for (const auto& t : arr) {
            if (!t.is_string())
                throw error(errc::manifest, "task '" + task + "': templates must be strings");
            bank.templates.push_back(t.get<std::string>());
        }
        auto vs = validate(bank);
        if (!vs.empty()) throw invariant_error(std::move(vs));
        banks.emplace(task, std::move(bank));
    }
    return banks;
}

namespace detail {

inline std::string frame_preamble(std::size_t frames) {
    std::string s;
    for (std::size_t j = 0; j < frames; ++j)
        s += "image " + std::to_string(j) + " is [IMG" + std::to_string(j) + "] {image}. \n";
    return s;
}

}  // namespace detail

/// The bank shipped with the compiler. One entry per task family; templates
/// follow the instruction-tuning phrasing of the released instruction tables
/// (declaration phrases normalized to the "is"/":" forms).
inline const bank_set& default_banks() {
    static const bank_set banks = [] {
        bank_set b;
        auto add = [&](std::string task, std::vector<std::string> templates) {
            b.emplace(task, template_bank{task, std::move(templates)});
        };

        add("captioning", {
            "Carefully analyze image 0: [IMG0] {image} to generate a concise and accurate "
            "description that accurately represents the objects, people, and scenery present.",
            "Use clear and concise language that accurately describes the content of image 0: "
            "[IMG0] {image}.",
            "Your caption should provide sufficient information about image 0: [IMG0] {image} so "
            "that someone who has not seen the image can understand it.",
            "image 0 is [IMG0] {image}. Be specific and detailed in your description of image 0, "
            "but also try to capture the essence of image 0 in a succinct way.",
            "image 0 is [IMG0] {image}. Based on the image 0, describe what is contained in this "
            "photo. Your caption should be no more than a few sentences and should be "
            "grammatically correct and free of spelling errors.",
            "Include information in your caption that is specific to image 0: [IMG0] {image} and "
            "avoid using generic or ambiguous descriptions.",
            "image 0 is [IMG0] {image}. Based on the image 0, give a caption about this image. "
            "Think about what message or story image 0 is conveying, and try to capture that in "
            "your image caption.",
            "Based on the image 0, give a caption about this image. Your caption should provide "
            "enough detail about image 0: [IMG0] {image} to give the viewer a sense of what is "
            "happening in the image.",
            "Give a caption about this image. Avoid using overly complex language or jargon in "
            "your caption of image 0: [IMG0] {image} that might confuse the viewer.",
            "Be creative in your approach to captioning image 0: [IMG0] {image} and try to convey "
            "a unique perspective or story.",
        });

        add("classification", {
            "image 0 is [IMG0] {image}. Please identify the object or concept depicted in image 0.",
            "image 0 is [IMG0] {image}. What is the main subject of image 0?",
            "image 0 is [IMG0] {image}. Can you recognize and label the object shown in image 0?",
            "image 0 is [IMG0] {image}. Identify the category or class to which image 0 belongs.",
            "image 0 is [IMG0] {image}. Based on the visual content, determine what image 0 "
            "represents.",
            "image 0 is [IMG0] {image}. What is the name or label of the item captured in image 0?",
            "image 0 is [IMG0] {image}. Please provide a description or identification of the "
            "subject in image 0.",
            "image 0 is [IMG0] {image}. From the visual cues, determine the object or entity "
            "depicted in image 0.",
            "image 0 is [IMG0] {image}. Can you recognize and name the primary element shown in "
            "image 0?",
            "image 0 is [IMG0] {image}. Identify the object or concept that best describes what "
            "is depicted in image 0.",
        });

        add("kvqa", {
            "Look at image 0: [IMG0] {image} carefully and read question: {question}. Try to "
            "understand what is being asked before selecting an answer.",
            "image 0 is [IMG0] {image}. Consider all of the information in image 0 labeled [IMG0] "
            "when answering question. Look at objects, colors, shapes, and other details that may "
            "be relevant to question: {question} Answer: ",
            "image 0 is [IMG0] {image}. Read each answer choice carefully and answers question : "
            "{question} based on the information provided in image 0.",
            "image 0 is [IMG0] {image}. Given the picture [IMG0], pay attention to the wording of "
            "question and answer the following question: {question} Answer: ",
            "Read the question carefully and look at image 0: [IMG0] {image}. Use your intuition "
            "and common sense when answering the question: {question}",
            "Consider all of the information in image 0: [IMG0] {image} when answering the "
            "question: {question}",
            "Take your time when answering each question. Don't rush through the questions, and "
            "make sure you have carefully considered all of the information provided in image 0: "
            "[IMG0] {image} and the question before making your selection. Question: {question} "
            "Answer: ",
            "Make sure your answers are based on the information presented in the image 0: [IMG0] "
            "{image}. Question:{question} Answer:",
            "Carefully examine image 0: [IMG0] {image} before answering the question. "
            "Question:{question} Answer:",
            "Please refer to image 0: [IMG0] {image} when answering the following questions: "
            "{question} Answer:",
        });

        add("vqa", {
            "image 0 is [IMG0] {image}. For the question, carefully examine the image and use "
            "your knowledge to determine the correct answer. Question: {question} Answer:",
            "image 0 is [IMG0] {image}. Given the picture [IMG0], pay attention to the wording of "
            "question and answer the following question: {question} Answer: ",
            "Read the question carefully and look at image 0: [IMG0] {image}. Use your intuition "
            "and common sense when answering the question: {question}",
            "Answer each question based on the information presented in image 0: [IMG0] {image}. "
            "Given the picture [IMG0], what is the answer to the question: {question} Answer:",
            "Please refer to image 0: [IMG0] {image} when answering the following questions: "
            "{question} Answer:",
            "Questions is related to image 0: [IMG0] {image}. Please analyze the image and "
            "provide the correct answer for the question: {question}",
            "Read the question carefully and look at image 0: [IMG0] {image}. Use your intuition "
            "and common sense when answering the question: {question} ",
            "Consider all of the information in image 0: [IMG0] {image} when answering the "
            "question: {question}",
            "Take your time when answering each question. Don't rush through the questions, and "
            "make sure you have carefully considered all of the information provided in image 0: "
            "[IMG0] {image} and the question before making your selection. Question: {question} "
            "Answer: ",
            "Use the image 0: [IMG0] {image} as a visual aid to help you answer the questions "
            "accurately. Question:{question} Answer:",
        });

        add("stvqa", {
            "Answer each question based on the information presented in image 0: [IMG0] {image}. "
            "Given the picture [IMG0], what is the answer to the question: {question} Answer:",
            "Please refer to image 0: [IMG0] {image} when answering the following questions: "
            "{question} Answer:",
            "Questions is related to image 0: [IMG0] {image}. Please analyze the image and "
            "provide the correct answer for the question: {question}",
            "For each question, use the image 0: [IMG0] {image} as a reference to answer the "
            "question: {question}",
            "Make sure your answers are based on the information presented in the image 0: [IMG0] "
            "{image}, and any OCR text associated with it. Question:{question} Answer:",
            "Answer the question as accurately as possible using the information provided in the "
            "image 0: [IMG0] {image}, and any OCR text associated with it. Question:{question} "
            "Answer:",
            "Please ensure that you are answering the question based on the information presented "
            "in the image 0: [IMG0] {image}.Question:{question} Answer:",
            "The image 0: [IMG0] {image} is the primary source of information for answering the "
            "questions. Please refer to it carefully when answering question: {question} Answer:",
            "Pay close attention to the details in image 0: [IMG0] {image}, as they may provide "
            "important information for answering the questions. Question:{question} Answer:",
            "Use the image 0: [IMG0] {image} as a visual aid to help you understand the context "
            "and answer the questions accurately. Question:{question} Answer:",
        });

        add("wikiart", {
            "image 0 is [IMG0] {image}. Please provide information about the artist, genre, and "
            "style of this artwork.",
            "image 0 is [IMG0] {image}. I would like to know the artist's name, the genre, and "
            "the specific style depicted in this painting.",
            "image 0 is [IMG0] {image}. Could you identify the artistic genre, the artist, and "
            "the style portrayed in this artwork?",
            "image 0 is [IMG0] {image}. In this painting, which genre does it belong to, who is "
            "the artist, and what is the predominant style?",
            "image 0 is [IMG0] {image}. Tell me about the artist, genre, and style associated "
            "with this particular artwork.",
            "image 0 is [IMG0] {image}. This piece of art seems intriguing. Can you provide "
            "details about the genre, the artist, and the style it represents?",
            "image 0 is [IMG0] {image}. Identify the genre, artist, and style of this captivating "
            "artwork, please.",
            "image 0 is [IMG0] {image}. I'm curious to learn about the artist's name, the genre, "
            "and the distinctive style showcased in this artwork.",
            "image 0 is [IMG0] {image}. Could you enlighten me about the genre, artist, and the "
            "artistic style that characterizes this beautiful piece?",
            "image 0 is [IMG0] {image}. In terms of genre, artist, and style, what information "
            "can you provide regarding this fascinating artwork?",
        });

        add("refcoco", {
            "image 0 is [IMG0] {image}.Given image 0, create a descriptive caption that "
            "accurately represents the content of the image, including the item located in the "
            "{quadrant} of the image.",
            "Use your knowledge of the image 0 and the {quadrant} location to generate a detailed "
            "and accurate caption that captures the essence of the scene. Keep in mind that image "
            "0 is [IMG0] {image}.",
            "image 0 is [IMG0] {image}. When writing your caption, be sure to include specific "
            "details about the item located in the {quadrant} of the image 0, such as its size, "
            "shape, color, and position.",
            "Think about the intended audience for your caption and use appropriate language and "
            "tone. Consider the context of the image 0: [IMG0] {image} and the {quadrant} "
            "location when creating your caption, and make sure that it accurately reflects the "
            "content of the image.",
            "Your caption should be concise and to the point, while still capturing the essence "
            "of the image 0 and the item located in the {quadrant} of the image. Avoid including "
            "irrelevant information in your caption that detracts from the main content of the "
            "image. Remember that image 0 is [IMG0] {image}.",
            "image 0 is [IMG0] {image}. Check your caption for accuracy and grammatical errors "
            "before submitting. Be creative in your approach to captioning the image and the item "
            "located in the {quadrant}.",
            "image 0 is [IMG0] {image}. Given image 0, describe the item in the {quadrant} of the "
            "image.",
            "image 0 is [IMG0] {image}. Using image 0, provide a caption for the object located "
            "in the {quadrant} of the image.",
            "For image 0: [IMG0] {image}, describe the object in the {quadrant} of the image.",
            "Given the image 0: [IMG0] {image}. Generate a description for the item located in "
            "the {quadrant} of the image.",
            "image 0 is [IMG0] {image}. Using the provided image 0, describe the object located "
            "in the {quadrant} of the image.",
        });

        const std::string pre = detail::frame_preamble(8);
        add("video_captioning", {
            pre + "Watch the images carefully and write a detailed description of what you see.",
            pre + "After viewing the images, provide a summary of the main events or key points "
                  "depicted.",
            pre + "Pay close attention to the details in the images and provide accurate "
                  "description to the images based on what you see.",
            pre + "Utilize your comprehension skills to describe the context and events depicted "
                  "in the images.",
            pre + "Reflect on the images's narrative structure and identify any storytelling "
                  "techniques or narrative devices used. Write a detailed description of what you "
                  "see.",
            pre + "Consider both the explicit and implicit information conveyed in the images to "
                  "provide comprehensive description of the images.",
        });

        const std::string qa_tail = " Qusetion: {question}. Answer:";
        add("video_qa", {
            pre + "Watch the provided images carefully and answer the following questions based "
                  "on your understanding of the images content." + qa_tail,
            pre + "Carefully analyze the visual elements of the images and answer the questions "
                  "based on your observations." + qa_tail,
            pre + "Pay close attention to the details in the images and provide accurate answers "
                  "to the questions based on what you see." + qa_tail,
            pre + "Utilize your comprehension skills to answer the questions based on the context "
                  "and events depicted in the images." + qa_tail,
            pre + "Consider the relationships between the images frames, scenes, and the provided "
                  "questions to formulate accurate answers." + qa_tail,
            pre + "Use your knowledge of the images's content to answer the questions by "
                  "recalling specific details and events." + qa_tail,
            pre + "Make logical inferences based on the information presented in the images to "
                  "answer the questions with reasoned explanations." + qa_tail,
            pre + "While answering the questions, consider both the explicit and implicit "
                  "information conveyed in the images to provide comprehensive responses." + qa_tail,
            pre + "Formulate your answers by considering the temporal context of the images and "
                  "the chronological order of events." + qa_tail,
            pre + "Take into account the emotions, actions, and interactions of the characters in "
                  "the images when answering the questions." + qa_tail,
        });

        add("gqa", {
            "image 0 is [IMG0] {image}. For the question, carefully examine the image and use "
            "your knowledge to determine the correct answer. Question: {question} Answer:",
            "image 0 is [IMG0] {image}. Given the picture [IMG0], pay attention to the wording of "
            "question and answer the following question: {question} Answer: ",
            "Read the question carefully and look at image 0: [IMG0] {image}. Use your intuition "
            "and common sense when answering the question: {question}",
            "Consider all of the information in image 0: [IMG0] {image} when answering the "
            "question: {question}",
            "The image 0: [IMG0] {image} is the primary source of information for answering the "
            "questions. Please refer to it carefully when answering question: {question} Answer:",
            "Pay close attention to the details in image 0: [IMG0] {image}, as they may provide "
            "important information for answering the questions. Question:{question} Answer:",
            "image 0 is [IMG0] {image}. Make sure your answer is relevant to the question and the "
            "image 0. Question:{question} Answer:",
            "image 0 is [IMG0] {image}. Do not provide answers based on assumptions or personal "
            "opinions; only use the information presented in the image 0 and the question. "
            "Question:{question} Answer:",
            "Look at image 0: [IMG0] {image} carefully and read question: {question}. Try to "
            "understand what is being asked before selecting an answer.",
            "image 0 is [IMG0] {image}. Consider all of the information in image 0 labeled [IMG0] "
            "when answering question. Look at objects, colors, shapes, and other details that may "
            "be relevant to question: {question} Answer: ",
        });

        add("vcr", {
            "{prompt}. Given the options below, based on the photo [IMG0], select the most "
            "suitable answer for the following question: {question}. Options: {options}",
            "Please read the question and answer choices carefully. Select the option that best "
            "answers the question. {prompt}. Given the images, select the best option that "
            "answers the question from the available answer choices. Question: {question} "
            "Options: {options} Answer:",
            "Choose the answer that best fits the description or action in the image. {prompt}. "
            "Consider the scene depicted in the images, choose the answer that best fits the "
            "description or action in the image from the available answer choices. Question: "
            "{question} Options: {options} Answer:",
            "{prompt}. Examine the details in the pictures and use them to inform your answer to "
            "the question. Choose the best answer from the available options. Question: "
            "{question} Options: {options} Answer:",
            "Look closely at the images and think about what is happening in the scene. {prompt}. "
            "Given the pictures, carefully examine the images and select the best answer that "
            "describes what is happening in the scene from the available answer choices. "
            "Question: {question} Options: {options} Answer:",
            "Consider all of the details in the image and the wording of the question before "
            "making your selection. {prompt}. Given the pictures, consider all of the details in "
            "the image and the wording of the question before selecting the best answer choice "
            "from the available options. Question: {question} Options: {options} Answer:",
            "Remember to use your common sense and reasoning skills to choose the best answer. "
            "{prompt}. Think about the images, use your common sense and reasoning skills to "
            "select the best answer choice from the available options. Question: {question} "
            "Options: {options} Answer:",
            "{prompt}. Select the answer that most closely matches the description or action in "
            "images, based on the available options. Given the picture [IMG0], select the answer "
            "choice that most closely matches the description or action in the image from the "
            "available options. Question: {question} Options: {options} Answer:",
            "Choose the option that provides the most accurate and complete answer to the "
            "question, based on the available information. {prompt} Given the images, select the "
            "option that provides the most accurate and complete answer to the question from the "
            "available answer choices. Question: {question} Options: {options} Answer:",
            "{prompt}. Use the information in the images to help you make the best choice from "
            "the available answer options for the question Question: {question} Options: "
            "{options} Answer:",
        });

        add("nlvr2", {
            "image 0 is [IMG0] {image}. Given the picture [IMG0], answer the following question: "
            "{question} Is this correct? True or False. Answer: ",
            "For the question: {question}, carefully examine image 0: [IMG0] {image} and use your "
            "knowledge to determine if the statement is True or False.",
            "Please refer to image 0: [IMG0] {image} when answering the question: {question} Is "
            "this correct? True or False. Answer: ",
            "Remember to consider both the question and the information presented in image 0: "
            "[IMG0] {image} when answering the True or False question: {question}",
            "image 0 is [IMG0] {image}.Answer the question: {question} based on the information "
            "presented in the image 0 and determine if the statement is True or False.",
            "Carefully examine the image 0: [IMG0] {image} and use your knowledge to determine "
            "whether the statement is True or False. Question: {question}",
            "Remember that the answer to each question is either True or False, so make sure you "
            "choose the correct option based on the information presented in image 0: [IMG0] "
            "{image}. Question: {question}",
            "Make sure your answers are based on the information presented in the image 0: [IMG0] "
            "{image}. Question:{question} Is this correct?True or False. Answer:",
            "Carefully examine image 0: [IMG0] {image} before answering the question. "
            "Question:{question} True or False? Answer:",
        });

        return b;
    }();
    return banks;
}

}  // namespace mic

#endif  // MIC_TEMPLATES_HPP
