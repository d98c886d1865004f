import { layoutForest } from "./layout.js";
import type {
  ForestPayload,
  IntervalPayload,
  RumourRow,
  StanceHistogram,
  TopicEntry,
  WordCloudEntry,
} from "./types.js";

/** Hex paint for the service-declared stance colour names. */
export const COLOUR_HEX: Record<string, string> = {
  green: "#2e8b57",
  grey: "#7f8c8d",
  red: "#c0392b",
};

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  parent: Element,
  tag: K,
  cls?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = parent.ownerDocument.createElement(tag);
  if (cls) {
    node.className = cls;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  parent.appendChild(node);
  return node;
}

function svgEl(parent: Element, tag: string): Element {
  const node = parent.ownerDocument.createElementNS(SVG_NS, tag);
  parent.appendChild(node);
  return node;
}

function clear(node: Element): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

function fmtTime(ms: number | null): string {
  return ms === null ? "-" : new Date(ms).toISOString().replace(".000Z", "Z");
}

function fmtNumber(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toPrecision(6);
}

export function renderTopics(
  container: Element,
  topics: TopicEntry[],
  onSelect: (topic: string) => void,
): void {
  clear(container);
  for (const t of topics) {
    const item = el(container, "button", "topic");
    item.dataset.topic = t.topic;
    item.type = "button";
    el(item, "span", "topic-name", t.topic);
    el(item, "span", "topic-count", `${t.rumour_count}`);
    item.addEventListener("click", () => onSelect(t.topic));
  }
}

function histogramBar(container: Element, hist: StanceHistogram): void {
  const total = hist.support + hist.neutral + hist.against;
  const bar = el(container, "div", "histogram");
  bar.dataset.support = String(hist.support);
  bar.dataset.neutral = String(hist.neutral);
  bar.dataset.against = String(hist.against);
  const parts: [string, number, string][] = [
    ["support", hist.support, COLOUR_HEX.green],
    ["neutral", hist.neutral, COLOUR_HEX.grey],
    ["against", hist.against, COLOUR_HEX.red],
  ];
  for (const [stance, count, colour] of parts) {
    const seg = el(bar, "span", "histogram-seg", `${count}`);
    seg.dataset.stance = stance;
    seg.dataset.count = String(count);
    seg.style.backgroundColor = colour;
    seg.style.flexGrow = String(total === 0 ? 1 : count);
    seg.title = `${stance}: ${count}`;
  }
}

export function renderRumourList(
  container: Element,
  rows: RumourRow[],
  onSelect: (rumourId: string) => void,
): void {
  clear(container);
  for (const r of rows) {
    const card = el(container, "button", "rumour");
    card.dataset.rumourId = r.rumour_id;
    card.type = "button";
    el(card, "div", "claim", r.claim);
    el(card, "div", "meta", `first tweet ${fmtTime(r.first_tweet_at)}`);
    el(card, "div", "meta", `${r.tweet_count} tweets`);
    histogramBar(card, r.stance_histogram);
    const verdict = el(
      card,
      "div",
      "verdict",
      `${r.predicted_true ? "likely true" : "likely false"} (p=${fmtNumber(r.veracity_probability)})`,
    );
    verdict.dataset.probability = String(r.veracity_probability);
    card.addEventListener("click", () => onSelect(r.rumour_id));
  }
}

export function renderWordCloud(container: Element, entries: WordCloudEntry[]): void {
  clear(container);
  const max = entries.reduce((m, e) => Math.max(m, e.count), 1);
  for (const e of entries) {
    const span = el(container, "span", "cloud-word", e.token);
    span.dataset.count = String(e.count);
    span.style.fontSize = `${11 + Math.round((17 * e.count) / max)}px`;
    span.title = `${e.token}: ${e.count}`;
  }
}

export function renderVeracityPanel(container: Element, payload: IntervalPayload): void {
  clear(container);
  const value = el(container, "div", "veracity-value", fmtNumber(payload.veracity_probability));
  value.dataset.probability = String(payload.veracity_probability);
  el(
    container,
    "div",
    "veracity-caption",
    `veracity probability at interval ${payload.interval} (${payload.tweet_count} tweets)`,
  );
  const count = el(container, "div", "tweet-count", `${payload.tweet_count}`);
  count.dataset.tweetCount = String(payload.tweet_count);
}

export function renderHistogramPanel(container: Element, hist: StanceHistogram): void {
  clear(container);
  histogramBar(container, hist);
}

export function renderFeatureTable(
  container: Element,
  features: Record<string, number>,
): void {
  clear(container);
  const table = el(container, "table", "features");
  for (const name of Object.keys(features)) {
    const row = el(table, "tr");
    row.dataset.feature = name;
    el(row, "td", "feature-name", name);
    const cell = el(row, "td", "feature-value", fmtNumber(features[name]));
    cell.dataset.value = String(features[name]);
  }
}

export function renderForest(container: Element, payload: ForestPayload): void {
  clear(container);
  const laid = layoutForest(payload);
  const slotW = 34;
  const rowH = 56;
  const pad = 24;
  const width = laid.slots * slotW + 2 * pad;
  const height = (laid.depth + 1) * rowH + 2 * pad;
  const svg = svgEl(container, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  (svg as SVGElement).dataset.interval = String(payload.interval);

  const px = (x: number) => pad + (x + 0.5) * slotW;
  const py = (y: number) => pad + y * rowH + rowH / 2;

  const byStance = new Map<string, Element>();
  for (const group of payload.stances) {
    const g = svgEl(svg, "g");
    g.setAttribute("data-stance", group.stance);
    g.setAttribute("data-colour", group.colour);
    byStance.set(group.stance, g);
  }
  for (const e of laid.edges) {
    const line = svgEl(byStance.get(e.stance)!, "line");
    line.setAttribute("x1", String(px(e.x1)));
    line.setAttribute("y1", String(py(e.y1)));
    line.setAttribute("x2", String(px(e.x2)));
    line.setAttribute("y2", String(py(e.y2)));
    line.setAttribute("stroke", "#999");
    if (!e.via_follow) {
      line.setAttribute("stroke-dasharray", "4 3"); // degraded-to-source edge
    }
  }
  for (const n of laid.nodes) {
    const circle = svgEl(byStance.get(n.stance)!, "circle");
    circle.setAttribute("cx", String(px(n.x)));
    circle.setAttribute("cy", String(py(n.y)));
    circle.setAttribute("r", "7");
    circle.setAttribute("fill", COLOUR_HEX[n.colour] ?? n.colour);
    circle.setAttribute("data-user", n.user);
    const title = svgEl(circle, "title");
    title.textContent = `${n.user} (${n.stance})`;
  }
}

export interface CurvePoint {
  k: number;
  value: number;
}

/** Polyline over whatever intervals are cached so far; the current
 *  interval gets a highlight ring. Pure view: points come from payloads. */
export function renderCurve(
  container: Element,
  points: CurvePoint[],
  currentK: number,
  label: string,
): void {
  clear(container);
  el(container, "div", "curve-label", label);
  const width = 420;
  const height = 120;
  const pad = 16;
  const svg = svgEl(container, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));

  const values = points.map((p) => p.value);
  const lo = Math.min(0, ...values);
  const hi = Math.max(1, ...values);
  const span = hi - lo || 1;
  const px = (k: number) => pad + ((k - 1) / 19) * (width - 2 * pad);
  const py = (v: number) => height - pad - ((v - lo) / span) * (height - 2 * pad);

  const sorted = [...points].sort((a, b) => a.k - b.k);
  if (sorted.length > 1) {
    const line = svgEl(svg, "polyline");
    line.setAttribute("points", sorted.map((p) => `${px(p.k)},${py(p.value)}`).join(" "));
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", "#4a6fa5");
    line.setAttribute("stroke-width", "2");
  }
  for (const p of sorted) {
    const dot = svgEl(svg, "circle");
    dot.setAttribute("cx", String(px(p.k)));
    dot.setAttribute("cy", String(py(p.value)));
    dot.setAttribute("r", p.k === currentK ? "5" : "3");
    dot.setAttribute("fill", p.k === currentK ? "#d08a00" : "#4a6fa5");
    dot.setAttribute("data-k", String(p.k));
    dot.setAttribute("data-value", String(p.value));
  }
}

export function renderErrorBanner(banner: HTMLElement, message: string | null): void {
  if (message === null) {
    banner.hidden = true;
    banner.textContent = "";
  } else {
    banner.hidden = false;
    banner.textContent = message;
  }
}
