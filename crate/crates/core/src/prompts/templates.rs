// Embedded stage templates. Adjacent literals are concatenated with no
// separator, so spacing between directives is significant.

pub(super) const PLAN: &str = concat!(
    "Provide guided steps to solve the following problem and identify potential challenges.: {question}. ",
    "[requirement]: less text, don't give code",
);

pub(super) const CODE_BASIC: &str = concat!(
    "As a code expert, according to the guidance:{design_solution}",
    "please provide a python solution to the following programming problem: {question}.",
    "Ensure that the answer produced by your code matches the test cases in the examples:{test_case}",
    "[Important]only give the code and should not include any explanations or comments. ",
);

pub(super) const CODE_APPS: &str = concat!(
    "As a code expert, according to the guidance:{design_solution}",
    "please provide a python solution to the following programming problem: {question}.",
    "Ensure that the answer produced by your code matches the test cases in the examples:{test_case}",
    "The function name must be the same as in the problem{prompt_name}",
    "[Important]only give the code and should not include any explanations or comments. ",
);

pub(super) const CODE_CONTEST: &str = concat!(
    "As a code expert, according to the guidance:{design_solution}",
    "please provide a python solution to the following programming problem: {question}.",
    "Ensure that the answer produced by your code matches the test cases in the examples:{test_case}",
    "[Important]only give the code and should not include any explanations or comments. ",
    "[Important]:Use a function to solve the problem, ending with a return.All the code is inside the function.",
    "Make sure the function only requires a single string parameter.",
);

pub(super) const DEBUG_BASIC: &str = concat!(
    "According to the {question}, the code given is:{implementation_solution} ",
    ":Fix it using traceback:{result_traceback}. ",
    "[Important]Only give code don't analyze and no annotation",
);

pub(super) const DEBUG_APPS: &str = concat!(
    "According to the {question}, the code given is:{implementation_solution} ",
    ":Fix it using traceback:{result_traceback}. ",
    "[Important]Only give code don't analyze and no annotation",
    "Make sure the function name is the same as in the problem{prompt_name}",
);

pub(super) const DEBUG_CONTEST: &str = concat!(
    "According to the {question}, the code given is:{implementation_solution} ",
    ":Fix it using traceback:{result_traceback}.",
    "[Important]Only give code don't analyze and no annotation",
    "[Important]:Use a function to solve the problem, ending with a return.",
    "Make sure the function only requires a single string parameter.All the code is inside the function.",
    "Only code no comments or other things",
);

pub(super) const EXPERT_BASIC: &str = concat!(
    "{experience_digest}",
    "According to the problem:{question}",
    "Use the experience to give the code to solve it, make sure it will pass the text case:{test_case}",
);

pub(super) const EXPERT_APPS: &str = concat!(
    "{experience_digest}",
    "According to the problem:{question}",
    "Use the experience to give the code to solve it, make sure it will pass the text case:{test_case}",
    "[Important]:Only codes. No comments or annotation",
);

pub(super) const EXPERT_CONTEST: &str = concat!(
    "{experience_digest}",
    "According to the problem:{question}",
    "Use the experience to give the code to solve it, make sure it will pass the text case:{test_case}",
    "[Important]:Only codes. No comments or annotation",
    "Use a function to solve the problem, ending with a return, and only require a single string parameter",
    "All the code is inside the function.",
);

pub(super) const REFINE_BASIC: &str = concat!(
    "{experience_digest}",
    "For this problem, {question}, your previous answer encountered an error: {first_solution}. ",
    "Traceback: {result}. ",
    "To proceed, ensure the new solution meets the following requirements:\n",
    "1. Is fundamentally different from the previous solution.\n",
    "2. Fixes the above error.\n",
    "3. Passes all the given test cases: {test_case}.\n\n",
    "Here are some examples: {examples}. ",
    "Hint: Try to explore different logic or structures, such as using loops, functions, or list comprehensions.\n\n",
);

pub(super) const REFINE_APPS: &str = concat!(
    "{experience_digest}",
    "For this problem, {question}, your previous answer encountered an error: {first_solution}. ",
    "Traceback: {result}. ",
    "To proceed, ensure the new solution meets the following requirements:\n",
    "1. Is fundamentally different from the previous solution.\n",
    "2. Fixes the above error.\n",
    "3. Passes all the given test cases: {test_case}.\n\n",
    "Here are some examples: {examples}. ",
    "Hint: Try to explore different logic or structures, such as using loops, functions, or list comprehensions.\n\n",
    "[requirement]: Only codes. No comments or annotation",
    "Use the same function name in the problem{prompt_name}",
);

pub(super) const REFINE_CONTEST: &str = concat!(
    "{experience_digest}",
    "For this problem, {question}, your previous answer encountered an error: {first_solution}. ",
    "Traceback: {result}. ",
    "To proceed, ensure the new solution meets the following requirements:\n",
    "1. Is fundamentally different from the previous solution.\n",
    "2. Fixes the above error.\n",
    "3. Passes all the given test cases: {test_case}.\n\n",
    "Here are some examples: {examples}. ",
    "Hint: Try to explore different logic or structures, such as using loops, functions, or list comprehensions.\n\n",
    "[requirement]: Only codes. Make only require a single string parameter",
    "All the code is inside the function.",
    "code only require a single string parameter",
);
