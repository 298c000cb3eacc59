/** Resolving result-layer entities back to the paragraph/table they annotate. */

import type { DocumentJson, EntityJson, EntityRef } from "./types.js";

function entityById(doc: DocumentJson, layer: string, id: number): EntityJson | null {
  const entities = doc.layers[layer];
  if (!entities) return null;
  return entities.find((e) => e.id === id) ?? null;
}

/**
 * Map any entity reference to the clickable target entity the annotations
 * view presents: tagged spans resolve through their sentence to a paragraph,
 * generated/image results to their recorded target, and core-layer entities
 * to themselves.
 */
export function resolveTarget(doc: DocumentJson, ref: EntityRef): EntityRef {
  const entity = entityById(doc, ref.layer, ref.id);
  if (!entity) return ref;
  if (ref.layer.startsWith("tagged_")) {
    const sentenceId = entity.metadata["sentence_id"];
    if (typeof sentenceId === "number") {
      const sentence = entityById(doc, "sentences", sentenceId);
      const paragraphId = sentence?.metadata["paragraph_id"];
      if (typeof paragraphId === "number") {
        return { layer: "paragraphs", id: paragraphId };
      }
    }
    return ref;
  }
  if (ref.layer.startsWith("generated_") || ref.layer.startsWith("image_")) {
    const targetLayer = entity.metadata["target_layer"];
    const targetId = entity.metadata["target_id"];
    if (typeof targetLayer === "string" && typeof targetId === "number") {
      return { layer: targetLayer, id: targetId };
    }
  }
  return ref;
}
