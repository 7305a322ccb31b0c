/**
 * Prosthesis variant form model with client-side validation mirroring the
 * geometry rules; the server re-validates on PUT and stays authoritative.
 */

import type { ProsthesisDoc } from "./api.js";

export const MOBILITY_DEGREES = [0, 1, 2, 3] as const;

export interface VariantForm {
  supportingTeeth: string[];
  crownThickness: number;
  mobility: Record<string, number>;
  pdlThickness: number;
}

export function emptyVariant(): VariantForm {
  return { supportingTeeth: [], crownThickness: 0.6, mobility: {}, pdlThickness: 0.3 };
}

export function validateVariant(form: VariantForm): string[] {
  const errors: string[] = [];
  if (form.supportingTeeth.length < 2) {
    errors.push("a bridge needs at least 2 supporting teeth");
  }
  if (new Set(form.supportingTeeth).size !== form.supportingTeeth.length) {
    errors.push("supporting teeth must be distinct");
  }
  if (form.crownThickness < 0) {
    errors.push("crown thickness must be >= 0 mm");
  }
  if (!(form.pdlThickness > 0)) {
    errors.push("ligament thickness must be > 0 mm");
  }
  for (const [tooth, degree] of Object.entries(form.mobility)) {
    if (!MOBILITY_DEGREES.includes(degree as 0 | 1 | 2 | 3)) {
      errors.push(`mobility degree for ${tooth} must be 0..3`);
    }
  }
  return errors;
}

export function toDoc(form: VariantForm): ProsthesisDoc {
  return {
    supporting_teeth: [...form.supportingTeeth],
    crown_thickness: form.crownThickness,
    pontic_gaps: null,
    mobility: { ...form.mobility },
    pdl_thickness: { default: form.pdlThickness },
  };
}

export function fromDoc(doc: ProsthesisDoc): VariantForm {
  return {
    supportingTeeth: [...doc.supporting_teeth],
    crownThickness: doc.crown_thickness,
    mobility: { ...doc.mobility },
    pdlThickness: doc.pdl_thickness["default"] ?? Object.values(doc.pdl_thickness)[0] ?? 0.3,
  };
}
