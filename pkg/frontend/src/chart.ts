/** Feedback-factor trail: one point per closed iteration, values straight
 * from the timeline response. Hand-rolled SVG keeps the bundle dependency-free. */

import { TimelineRowJson } from "./api.js";
import { getDocument, show } from "./dom.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 420;
const HEIGHT = 160;
const PAD = 28;

export function ffTrailSvg(rows: TimelineRowJson[]): SVGSVGElement {
  const doc = getDocument();
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("class", "ff-trail");

  const closed = rows.filter((r) => r.outcome_ff !== null);
  const axis = doc.createElementNS(SVG_NS, "path");
  axis.setAttribute("d", `M ${PAD} ${PAD} L ${PAD} ${HEIGHT - PAD} L ${WIDTH - PAD} ${HEIGHT - PAD}`);
  axis.setAttribute("class", "axis");
  svg.append(axis);

  if (closed.length === 0) {
    const empty = doc.createElementNS(SVG_NS, "text");
    empty.setAttribute("x", String(WIDTH / 2));
    empty.setAttribute("y", String(HEIGHT / 2));
    empty.setAttribute("text-anchor", "middle");
    empty.textContent = "no recorded outcomes yet";
    svg.append(empty);
    return svg;
  }

  const step = closed.length > 1 ? (WIDTH - 2 * PAD) / (closed.length - 1) : 0;
  const x = (i: number) => PAD + (closed.length > 1 ? i * step : (WIDTH - 2 * PAD) / 2);
  const y = (ff: number) => HEIGHT - PAD - ff * (HEIGHT - 2 * PAD);

  const line = doc.createElementNS(SVG_NS, "polyline");
  line.setAttribute("points", closed.map((r, i) => `${x(i)},${y(r.outcome_ff as number)}`).join(" "));
  line.setAttribute("class", "trail-line");
  line.setAttribute("fill", "none");
  svg.append(line);

  closed.forEach((row, i) => {
    const dot = doc.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(x(i)));
    dot.setAttribute("cy", String(y(row.outcome_ff as number)));
    dot.setAttribute("r", "3");
    dot.setAttribute("class", "trail-point");
    svg.append(dot);

    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(x(i)));
    label.setAttribute("y", String(y(row.outcome_ff as number) - 8));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "trail-label");
    label.textContent = show(row.outcome_ff);
    svg.append(label);

    const tick = doc.createElementNS(SVG_NS, "text");
    tick.setAttribute("x", String(x(i)));
    tick.setAttribute("y", String(HEIGHT - PAD + 16));
    tick.setAttribute("text-anchor", "middle");
    tick.setAttribute("class", "trail-tick");
    tick.textContent = String(row.index);
    svg.append(tick);
  });
  return svg;
}
