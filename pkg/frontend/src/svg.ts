/** Minimal deterministic SVG string building: no dates, no randomness. */

export type Attrs = Record<string, string | number>;

export function el(tag: string, attrs: Attrs, children: string[] = []): string {
  const attrText = Object.entries(attrs)
    .map(([key, value]) => `${key}="${value}"`)
    .join(" ");
  if (children.length === 0) return `<${tag} ${attrText}/>`;
  return `<${tag} ${attrText}>${children.join("")}</${tag}>`;
}

export function text(content: string, attrs: Attrs): string {
  return el("text", attrs, [escapeText(content)]);
}

export function escapeText(value: string): string {
  return value.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function svgDocument(width: number, height: number, children: string[]): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">` +
    `<rect x="0" y="0" width="${width}" height="${height}" fill="#ffffff"/>` +
    children.join("") +
    `</svg>`
  );
}

/** Fixed-precision coordinate formatting keeps output byte-stable. */
export function px(value: number): string {
  return value.toFixed(2);
}

export function fmt(value: number, digits = 1): string {
  return value.toFixed(digits);
}

export const METHOD_COLORS: Record<string, string> = {
  no_comm: "#7f7f7f",
  full_comm: "#1f77b4",
  compressed: "#ff7f0e",
  event_triggered: "#2ca02c",
  redundant: "#d62728",
};

const FALLBACK_COLORS = ["#9467bd", "#8c564b", "#e377c2", "#bcbd22", "#17becf"];

export function methodColor(method: string, index: number): string {
  return METHOD_COLORS[method] ?? FALLBACK_COLORS[index % FALLBACK_COLORS.length];
}

/** White -> red ramp for drop percentages in [0, 100]. */
export function npdColor(value: number): string {
  const t = Math.max(0, Math.min(100, value)) / 100;
  const channel = Math.round(255 - t * 195);
  const hex = channel.toString(16).padStart(2, "0");
  return `#ff${hex}${hex}`;
}

export function polylinePoints(points: Array<[number, number]>): string {
  return points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
}
