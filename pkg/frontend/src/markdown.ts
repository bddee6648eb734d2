/** Minimal markdown subset renderer: paragraphs, lists, fenced code,
 * inline code. Everything is built through DOM nodes and textContent,
 * so raw HTML in model output can never be injected. */

function inlineSpans(text: string): (HTMLElement | Text)[] {
  const nodes: (HTMLElement | Text)[] = [];
  const parts = text.split("`");
  parts.forEach((part, i) => {
    if (i % 2 === 1 && part.length > 0) {
      const code = document.createElement("code");
      code.textContent = part;
      nodes.push(code);
    } else if (part.length > 0) {
      nodes.push(document.createTextNode(part));
    }
  });
  return nodes;
}

function codeBlock(lines: string[], language: string): HTMLElement {
  const wrapper = document.createElement("div");
  wrapper.className = "code-block";
  const button = document.createElement("button");
  button.type = "button";
  button.className = "copy-btn";
  button.textContent = "Copy";
  const source = lines.join("\n");
  button.addEventListener("click", () => {
    void navigator.clipboard?.writeText(source);
    button.textContent = "Copied";
    setTimeout(() => (button.textContent = "Copy"), 1200);
  });
  const pre = document.createElement("pre");
  const code = document.createElement("code");
  if (language) {
    code.setAttribute("data-language", language);
  }
  code.textContent = source;
  pre.appendChild(code);
  wrapper.appendChild(button);
  wrapper.appendChild(pre);
  return wrapper;
}

export function renderMarkdown(text: string): DocumentFragment {
  const fragment = document.createDocumentFragment();
  const lines = text.replace(/\r\n/g, "\n").split("\n");

  let i = 0;
  let paragraph: string[] = [];
  let list: string[] = [];

  const flushParagraph = () => {
    if (paragraph.length) {
      const p = document.createElement("p");
      inlineSpans(paragraph.join(" ")).forEach((n) => p.appendChild(n));
      fragment.appendChild(p);
      paragraph = [];
    }
  };
  const flushList = () => {
    if (list.length) {
      const ul = document.createElement("ul");
      for (const item of list) {
        const li = document.createElement("li");
        inlineSpans(item).forEach((n) => li.appendChild(n));
        ul.appendChild(li);
      }
      fragment.appendChild(ul);
      list = [];
    }
  };

  while (i < lines.length) {
    const line = lines[i];
    const fence = line.match(/^```(\w*)\s*$/);
    if (fence) {
      flushParagraph();
      flushList();
      const body: string[] = [];
      i += 1;
      while (i < lines.length && !/^```\s*$/.test(lines[i])) {
        body.push(lines[i]);
        i += 1;
      }
      i += 1; // closing fence (or end of input)
      fragment.appendChild(codeBlock(body, fence[1]));
      continue;
    }
    const bullet = line.match(/^\s*[-*]\s+(.*)$/);
    if (bullet) {
      flushParagraph();
      list.push(bullet[1]);
      i += 1;
      continue;
    }
    if (line.trim() === "") {
      flushParagraph();
      flushList();
      i += 1;
      continue;
    }
    flushList();
    paragraph.push(line.trim());
    i += 1;
  }
  flushParagraph();
  flushList();
  return fragment;
}
