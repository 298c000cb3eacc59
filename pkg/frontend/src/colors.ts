/** Stable label colors: FNV-1a hash of the label onto an HSL wheel. */

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export function labelHue(label: string): number {
  return fnv1a(label) % 360;
}

export function labelColor(label: string): string {
  return `hsl(${labelHue(label)}, 70%, 82%)`;
}

export function labelBorder(label: string): string {
  return `hsl(${labelHue(label)}, 60%, 45%)`;
}
