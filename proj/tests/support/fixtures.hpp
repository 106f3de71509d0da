#pragma once

// Hand-written miniature corpus: 2 sentences x 5 tokens, 3 instances.
// Expected positions and counts in the tests are hand-counted from here.

namespace wsd::testfix {

inline constexpr const char* kMiniCorpusXml = R"(<corpus lang="en">
  <text id="d0">
    <sentence id="d0.s0">
      <wf lemma="the" pos="DET">The</wf>
      <wf lemma="dog" pos="NOUN">dog</wf>
      <instance id="d0.s0.t2" lemma="bark" pos="NOUN">bark</instance>
      <wf lemma="be" pos="VERB">was</wf>
      <wf lemma="loud" pos="ADJ">loud</wf>
    </sentence>
    <sentence id="d0.s1">
      <wf lemma="the" pos="DET">The</wf>
      <instance id="d0.s1.t1" lemma="tree" pos="NOUN">tree</instance>
      <instance id="d0.s1.t2" lemma="bark" pos="NOUN">bark</instance>
      <wf lemma="be" pos="VERB">was</wf>
      <wf lemma="dark" pos="ADJ">dark</wf>
    </sentence>
  </text>
</corpus>
)";

inline constexpr const char* kMiniGold =
    "d0.s0.t2 bark%1:20:00::\n"
    "d0.s1.t1 tree%1:20:00::\n"
    "d0.s1.t2 bark%1:20:01::\n";

inline constexpr const char* kMiniInventory =
    "bark\tNOUN\tbark%1:20:00::\tthe sound a dog makes\n"
    "bark\tNOUN\tbark%1:20:01::\trough covering of a tree trunk\n"
    "tree\tNOUN\ttree%1:20:00::\ta tall plant with a trunk\n";

}  // namespace wsd::testfix
